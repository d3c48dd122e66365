"""
Django settings for the convex regularization laboratory.

The numerical tunables of the ``reglab`` application live in the ``REGLAB``
dict at the bottom of this file. A handful of them can be overridden from
the environment (``REGLAB_GRAD_TOL``, ``REGLAB_MAX_ITER``,
``REGLAB_LOG_LEVEL``).

For more information on this file, see
https://docs.djangoproject.com/en/5.2/topics/settings/
"""
import os
from pathlib import Path

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent


# SECURITY WARNING: keep the secret key used in production secret!
SECRET_KEY = os.environ.get(
    'DJANGO_SECRET_KEY',
    'django-insecure-reglab-local-key-8c1f0e4b7a2d9e6f3b5a1c7d0e9f2a4b',
)

# SECURITY WARNING: don't run with debug turned on in production!
DEBUG = os.environ.get('DJANGO_DEBUG', '1') == '1'

ALLOWED_HOSTS = ['localhost', '127.0.0.1']


# Application definition

INSTALLED_APPS = [
    'django.contrib.admin',
    'django.contrib.auth',
    'django.contrib.contenttypes',
    'django.contrib.sessions',
    'django.contrib.messages',
    'django.contrib.staticfiles',
    'reglab',
]

MIDDLEWARE = [
    'django.middleware.security.SecurityMiddleware',
    'django.contrib.sessions.middleware.SessionMiddleware',
    'django.middleware.common.CommonMiddleware',
    'django.middleware.csrf.CsrfViewMiddleware',
    'django.contrib.auth.middleware.AuthenticationMiddleware',
    'django.contrib.messages.middleware.MessageMiddleware',
    'django.middleware.clickjacking.XFrameOptionsMiddleware',
]

ROOT_URLCONF = 'config.urls'

TEMPLATES = [
    {
        'BACKEND': 'django.template.backends.django.DjangoTemplates',
        'DIRS': [],
        'APP_DIRS': True,
        'OPTIONS': {
            'context_processors': [
                'django.template.context_processors.request',
                'django.contrib.auth.context_processors.auth',
                'django.contrib.messages.context_processors.messages',
            ],
        },
    },
]

WSGI_APPLICATION = 'config.wsgi.application'


# Database
# https://docs.djangoproject.com/en/5.2/ref/settings/#databases

DATABASES = {
    'default': {
        'ENGINE': 'django.db.backends.sqlite3',
        'NAME': BASE_DIR / 'db.sqlite3',
    }
}


# Internationalization

LANGUAGE_CODE = 'en-us'

TIME_ZONE = 'UTC'

USE_I18N = True

USE_TZ = True


# Static files (admin only)

STATIC_URL = 'static/'

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'


# Logging

REGLAB_LOG_LEVEL = os.environ.get('REGLAB_LOG_LEVEL', 'WARNING')

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'plain': {
            'format': '{levelname} {name}: {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'plain',
        },
    },
    'loggers': {
        'reglab': {
            'handlers': ['console'],
            'level': REGLAB_LOG_LEVEL,
            'propagate': False,
        },
    },
}


# Regularization laboratory

REGLAB = {
    # solver
    'GRAD_TOL': float(os.environ.get('REGLAB_GRAD_TOL', '1e-9')),
    'MAX_ITER': int(os.environ.get('REGLAB_MAX_ITER', '50000')),
    'INITIAL_STEP': 1.0,
    'SHRINK': 0.5,
    'SUFFICIENT_DECREASE': 1e-4,
    # power iteration for the operator norm
    'NORM_TOL': 1e-12,
    'NORM_MAX_ITER': 5000,
    # rate studies
    'DEFAULT_DELTAS': (1e-1, 3e-2, 1e-2, 3e-3, 1e-3, 3e-4, 1e-4),
    'DEFAULT_MU': 1.0,
    'DEFAULT_EPS': 0.1,
    'DEFAULT_TAU': 1.0,
    'DEFAULT_P': 1.0,
    'QUARTIC_RADIUS': 10.0,
    # discrepancy search
    'BISECT_MAX_STEPS': 40,
    'BISECT_TOL': 1e-3,
}
