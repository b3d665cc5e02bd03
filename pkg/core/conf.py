from django.conf import settings
from django.core.exceptions import ImproperlyConfigured

# Used when the library is imported without configured Django settings
DEFAULTS = {
    'THREADS': 4,
    'QUAD_ABS_TOL': 1e-10,
    'QUAD_REL_TOL': 1e-8,
    'QUAD_BUDGET': 10 ** 6,
    'GAUSSIAN_TRUNCATION': 8.0,
    'OPT_TOL': 1e-8,
    'OPT_BUDGET': 10 ** 5,
    'ORDERING_TOL': 1e-6,
    'NORMAL_PARAMETER': 'variance',
    'RESOLUTION_ROUNDING': 'nearest',
    'DEFAULT_REPLICATIONS': 500,
    'DEFAULT_SEED': 20240607,
}


def risk_setting(name):
    """Read one entry of ``settings.COMPOSITE_RISK``, falling back to DEFAULTS."""
    try:
        configured = getattr(settings, 'COMPOSITE_RISK', {})
    except ImproperlyConfigured:
        configured = {}
    if name in configured:
        return configured[name]
    return DEFAULTS[name]
