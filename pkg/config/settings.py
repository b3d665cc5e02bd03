"""
Django settings for the composite risk project.

The project has no web surface; Django provides settings, app loading,
logging configuration and the management-command CLI.

For the full list of settings and their values, see
https://docs.djangoproject.com/en/5.2/ref/settings/
"""
import os
from pathlib import Path

from django.core.exceptions import ImproperlyConfigured
from dotenv import load_dotenv
load_dotenv()



# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent


SECRET_KEY = os.getenv('SECRET_KEY')
if not SECRET_KEY:
    if os.getenv('DJANGO_ENV') == 'production':
        raise ImproperlyConfigured(
            "SECRET_KEY environment variable must be set in production"
        )
    # Nothing is signed by this project; the key only satisfies Django's checks.
    SECRET_KEY = 'composite-risk-local-key'


DEBUG = os.getenv('DEBUG', 'False') == 'True'

ALLOWED_HOSTS = []


# Application definition

INSTALLED_APPS = [
    # Third party apps
    'rest_framework',

    # apps
    'core',
    'smoothing',
    'wavelet',
    'risk',
    'optimize',
    'experiments',
    'cli',
]


LANGUAGE_CODE = 'en-us'

TIME_ZONE = 'UTC'

USE_I18N = False

USE_TZ = True


# REST Framework Settings (serializers and renderers only)
REST_FRAMEWORK = {
    'UNAUTHENTICATED_USER': None,
    'COERCE_DECIMAL_TO_STRING': False,
}


def _env_int(name, default):
    value = os.getenv(name)
    if value in (None, ''):
        return default
    try:
        return int(value)
    except ValueError:
        raise ImproperlyConfigured(f"{name} must be an integer, got {value!r}")


# Numerical defaults shared by every app
COMPOSITE_RISK = {
    'THREADS': max(1, _env_int('COMPOSITE_RISK_THREADS', 4)),
    'QUAD_ABS_TOL': 1e-10,
    'QUAD_REL_TOL': 1e-8,
    'QUAD_BUDGET': 10 ** 6,  # integrand evaluations
    'GAUSSIAN_TRUNCATION': 8.0,  # standard units
    'OPT_TOL': float(os.getenv('COMPOSITE_RISK_OPT_TOL', '1e-8')),
    'OPT_BUDGET': _env_int('COMPOSITE_RISK_OPT_BUDGET', 10 ** 5),
    'ORDERING_TOL': 1e-6,
    # How the second parameter of N(mean, .) is read; see experiments.oracle
    'NORMAL_PARAMETER': os.getenv('COMPOSITE_RISK_NORMAL_PARAMETER', 'variance'),
    # Rounding of log2(N) / 5 in the wavelet resolution rule; see experiments.reference_tables
    'RESOLUTION_ROUNDING': os.getenv('COMPOSITE_RISK_RESOLUTION_ROUNDING', 'nearest'),
    'DEFAULT_REPLICATIONS': 500,
    'DEFAULT_SEED': _env_int('COMPOSITE_RISK_SEED', 20240607),
}


LOG_DIR = BASE_DIR / 'logs'
LOG_DIR.mkdir(exist_ok=True)

# Logging Configuration
LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '{levelname} {asctime} {module} {process:d} {thread:d} {message}',
            'style': '{',
        },
        'simple': {
            'format': '{levelname} {asctime} {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'level': os.getenv('COMPOSITE_RISK_LOG_LEVEL', 'WARNING'),
            'class': 'logging.StreamHandler',
            'formatter': 'simple',
        },
        'file_experiments': {
            'level': 'INFO',
            'class': 'logging.handlers.RotatingFileHandler',
            'filename': os.path.join(LOG_DIR, 'experiments.log'),
            'maxBytes': 1024 * 1024 * 10,  # 10 MB
            'backupCount': 5,
            'formatter': 'verbose',
        },
        'file_numerics': {
            'level': 'INFO',
            'class': 'logging.handlers.RotatingFileHandler',
            'filename': os.path.join(LOG_DIR, 'numerics.log'),
            'maxBytes': 1024 * 1024 * 5,  # 5 MB
            'backupCount': 5,
            'formatter': 'verbose',
        },
    },
    'loggers': {
        'experiments': {
            'handlers': ['file_experiments', 'console'],
            'level': 'INFO',
            'propagate': False,
        },
        'numerics': {
            'handlers': ['file_numerics', 'console'],
            'level': 'INFO',
            'propagate': False,
        },
        'cli': {
            'handlers': ['console'],
            'level': 'INFO',
            'propagate': False,
        },
    },
}

