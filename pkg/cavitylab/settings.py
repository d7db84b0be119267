"""
Django settings for the sideband cavity-QED toolkit.

This file holds the configuration for the project. The numerics live in the
sideband app; everything tunable about them (threads, step size, truncation,
rate convention) is read here with python-decouple so it can come from the
environment or a .env file.
"""

import os
from pathlib import Path
from decouple import config, Choices

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

# SECURITY WARNING: keep the secret key used in production secret!
SECRET_KEY = config('SECRET_KEY', default='django-insecure-change-this-key')

# SECURITY WARNING: don't run with debug turned on in production!
DEBUG = config('DEBUG', default=True, cast=bool)

ALLOWED_HOSTS = ['localhost', '127.0.0.1', '0.0.0.0']

# Application definition
INSTALLED_APPS = [
    'django.contrib.auth',
    'django.contrib.contenttypes',

    # Third party apps
    'rest_framework',
    'corsheaders',

    # My custom apps
    'sideband',
]

MIDDLEWARE = [
    'corsheaders.middleware.CorsMiddleware',
    'django.middleware.security.SecurityMiddleware',
    'django.middleware.common.CommonMiddleware',
]

ROOT_URLCONF = 'cavitylab.urls'

WSGI_APPLICATION = 'cavitylab.wsgi.application'

# Nothing is stored; auth is only here for DRF's anonymous user.
DATABASES = {
    'default': {
        'ENGINE': 'django.db.backends.sqlite3',
        'NAME': ':memory:',
    }
}

# Internationalization settings
LANGUAGE_CODE = 'en-us'
TIME_ZONE = 'UTC'
USE_I18N = False
USE_TZ = True

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'

# Django REST Framework configuration
REST_FRAMEWORK = {
    'DEFAULT_RENDERER_CLASSES': [
        'rest_framework.renderers.JSONRenderer',
    ],
    'DEFAULT_PARSER_CLASSES': [
        'rest_framework.parsers.JSONParser',
    ],
    'DEFAULT_AUTHENTICATION_CLASSES': [],
    'DEFAULT_PERMISSION_CLASSES': [],
    'UNAUTHENTICATED_USER': None,
}

# CORS settings
CORS_ALLOWED_ORIGINS = [
    "http://localhost:3000",
    "http://127.0.0.1:3000",
    "http://localhost:8080",
    "http://127.0.0.1:8080",
]

# Allow all origins in development
if DEBUG:
    CORS_ALLOW_ALL_ORIGINS = True

# Simulation settings
# 0 means one worker per CPU, 1 runs sweeps inline
SIDEBAND_THREADS = config('SIDEBAND_THREADS', default=0, cast=int)
SIDEBAND_N_MAX = config('SIDEBAND_N_MAX', default=2, cast=int)
SIDEBAND_STEPS_PER_PERIOD = config('SIDEBAND_STEPS_PER_PERIOD', default=2000, cast=int)
SIDEBAND_QUADRATURE_NODES = config('SIDEBAND_QUADRATURE_NODES', default=400, cast=int)
SIDEBAND_MAX_G_OVER_W = config('SIDEBAND_MAX_G_OVER_W', default=0.2, cast=float)

# How *_khz decay rates turn into 1/ns: 'linear' is value * 1e-6,
# 'angular' is 2*pi * value * 1e-6
SIDEBAND_RATE_CONVENTION = config(
    'SIDEBAND_RATE_CONVENTION',
    default='linear',
    cast=Choices(['linear', 'angular']),
)

SIDEBAND_OUTPUT_DIR = Path(config('SIDEBAND_OUTPUT_DIR', default=str(BASE_DIR / 'output')))

SIDEBAND_LOG_LEVEL = config('SIDEBAND_LOG_LEVEL', default='INFO')

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'simple': {
            'format': '{levelname} {name}: {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'simple',
        },
    },
    'loggers': {
        'sideband': {
            'handlers': ['console'],
            'level': SIDEBAND_LOG_LEVEL,
            'propagate': False,
        },
    },
}

# Workers forked for sweeps inherit this
os.environ.setdefault('OMP_NUM_THREADS', '1')
