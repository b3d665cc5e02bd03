"""
The ``composite-risk`` console script.

Each subcommand is a Django management command; this module maps the
hyphenated command names onto them and turns CommandError into an exit code.
"""
import logging
import os
import sys

logger = logging.getLogger('cli')

COMMANDS = {
    'risk-eval': 'risk_eval',
    'density-est': 'density_est',
    'oracle': 'oracle',
    'bias-study': 'bias_study',
    'repro-table': 'repro_table',
}

USAGE = (
    'usage: composite-risk {' + '|'.join(COMMANDS) + '} [options]\n'
    'Run "composite-risk <command> --help" for the options of a command.'
)


def _setup():
    os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'config.settings')
    import django

    django.setup()


def parse_and_dispatch(argv, stdout=None, stderr=None) -> int:
    """Run one command; 0 on success, 1 on usage or I/O errors, 2 on numerical failures."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    if not argv or argv[0] in ('-h', '--help'):
        stdout.write(USAGE + '\n')
        return 0 if argv else 1
    name = COMMANDS.get(argv[0])
    if name is None:
        stderr.write(f'Unknown command {argv[0]!r}\n{USAGE}\n')
        return 1

    _setup()
    from django.core.management import call_command
    from django.core.management.base import CommandError

    logger.info(f'Dispatching {argv[0]} with {argv[1:]}')
    try:
        call_command(name, *argv[1:], stdout=stdout, stderr=stderr)
    except CommandError as exc:
        stderr.write(f'{argv[0]}: {exc}\n')
        return exc.returncode
    return 0


def main():
    sys.exit(parse_and_dispatch(sys.argv[1:]))


if __name__ == '__main__':
    main()
