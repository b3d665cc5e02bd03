import logging
from functools import wraps

from django.core.management.base import CommandError

from rest_framework import serializers

from core.exceptions import BadParameters, CompositeRiskError

logger = logging.getLogger('cli')

USAGE_ERROR = 1
NUMERICAL_ERROR = 2


def exit_codes(handle):
    """
    Decorator mapping library failures of a command to CommandError exit codes.

    Usage:
        class Command(BaseCommand):
            @exit_codes
            def handle(self, *args, **options):
                ...

    Invalid parameters, validation and I/O errors exit with 1; every other
    CompositeRiskError exits with 2.
    """
    @wraps(handle)
    def wrapper(self, *args, **options):
        try:
            return handle(self, *args, **options)
        except BadParameters as exc:
            raise CommandError(f'Invalid parameters: {exc}', returncode=USAGE_ERROR)
        except serializers.ValidationError as exc:
            raise CommandError(f'Invalid configuration: {exc.detail}', returncode=USAGE_ERROR)
        except FileNotFoundError as exc:
            raise CommandError(f'File not found: {exc.filename}', returncode=USAGE_ERROR)
        except OSError as exc:
            raise CommandError(f'I/O error: {exc}', returncode=USAGE_ERROR)
        except CompositeRiskError as exc:
            logger.error(f'{type(exc).__name__} in {self.__module__}: {exc}')
            raise CommandError(f'Numerical failure ({type(exc).__name__}): {exc}', returncode=NUMERICAL_ERROR)
    return wrapper
