"""
Django settings for the decouple_lab project.

The project serves no HTTP; settings configure the decoupling engine,
the management commands, logging and the report database.

Every DECOUPLE_* value can be overridden from the environment.
"""

import os

# Build paths inside the project like this: os.path.join(BASE_DIR, ...)
BASE_DIR = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


SECRET_KEY = os.environ.get('DJANGO_SECRET_KEY', 'decouple-lab-local-only')

DEBUG = False

ALLOWED_HOSTS = []


# Application definition

INSTALLED_APPS = [
    'decoupling',
]

MIDDLEWARE = []


# Database
# Stores experiment reports saved with --record.

DATABASES = {
    'default': {
        'ENGINE': 'django.db.backends.sqlite3',
        'NAME': os.environ.get('DECOUPLE_DB', os.path.join(BASE_DIR, 'db.sqlite3')),
    }
}

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'


# Internationalization

LANGUAGE_CODE = 'en-us'

TIME_ZONE = 'UTC'

USE_I18N = False

USE_TZ = True


# Decoupling engine

# Tolerance applied to every bound report and residual check.
DECOUPLE_TOL = float(os.environ.get('DECOUPLE_TOL', '1e-9'))

# Largest number of atoms an exact enumeration may produce.
DECOUPLE_CAP = int(float(os.environ.get('DECOUPLE_CAP', '1e7')))

# Monte Carlo defaults.
DECOUPLE_MC_SAMPLES = int(os.environ.get('DECOUPLE_MC_SAMPLES', '100000'))
DECOUPLE_SEED = int(os.environ.get('DECOUPLE_SEED', '0'))
DECOUPLE_STREAMS = int(os.environ.get('DECOUPLE_STREAMS', '4'))
DECOUPLE_WORKERS = int(os.environ.get('DECOUPLE_WORKERS', '1'))


# Logging

DECOUPLE_LOG_LEVEL = os.environ.get('DECOUPLE_LOG_LEVEL', 'WARNING')

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '{asctime} {levelname} {name}: {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'verbose',
        },
    },
    'loggers': {
        'decoupling': {
            'handlers': ['console'],
            'level': DECOUPLE_LOG_LEVEL,
            'propagate': False,
        },
    },
}
