import os
from pathlib import Path
from dotenv import load_dotenv

# Load environment variables
load_dotenv()

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

SECRET_KEY = os.getenv('SECRET_KEY', 'wqed-insecure-default-development-key')

DEBUG = os.getenv('DEBUG', 'False') == 'True'

ALLOWED_HOSTS = []

# Application definition
DJANGO_APPS = [
    'django.contrib.contenttypes',
    'django.contrib.auth',
]

THIRD_PARTY_APPS = [
    'rest_framework',
]

LOCAL_APPS = [
    'dispersion',
    'selfenergy',
    'spectral',
    'boundstates',
    'oracle',
    'cli',
]

INSTALLED_APPS = DJANGO_APPS + THIRD_PARTY_APPS + LOCAL_APPS

# No operation touches the database; Django still wants one declared.
DATABASES = {
    'default': {
        'ENGINE': 'django.db.backends.sqlite3',
        'NAME': os.getenv('DB_NAME', str(BASE_DIR / 'wqed.sqlite3')),
    }
}

LANGUAGE_CODE = 'en-us'
TIME_ZONE = 'UTC'
USE_I18N = False
USE_TZ = True

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'

# Logging
LOG_LEVEL = os.getenv('LOG_LEVEL', 'INFO')

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '{levelname} {asctime} {name} {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'verbose',
        },
    },
    'root': {
        'handlers': ['console'],
        'level': LOG_LEVEL,
    },
}

# Quadrature settings
QUAD_RTOL = float(os.getenv('QUAD_RTOL', '1e-10'))
QUAD_LIMIT = int(os.getenv('QUAD_LIMIT', '200'))
QUAD_TAIL_FLOOR = float(os.getenv('QUAD_TAIL_FLOOR', '1e-16'))

# Pole finder settings
NEWTON_MAX_ITER = int(os.getenv('NEWTON_MAX_ITER', '100'))
NEWTON_STEP = float(os.getenv('NEWTON_STEP', '1e-7'))
NEWTON_TOL = float(os.getenv('NEWTON_TOL', '1e-10'))
THRESHOLD_CLAMP = float(os.getenv('THRESHOLD_CLAMP', '1e-4'))
FIXED_POINT_TOL = float(os.getenv('FIXED_POINT_TOL', '1e-12'))
FIXED_POINT_MAX_ITER = int(os.getenv('FIXED_POINT_MAX_ITER', '200'))

# lambda / M^(3/2) above this is tagged "nonperturbative"
PERTURBATIVE_LIMIT = float(os.getenv('PERTURBATIVE_LIMIT', '0.1'))

# Discretized-mode oracle settings
ORACLE_MODES = int(os.getenv('ORACLE_MODES', '4001'))
ORACLE_BOX_FACTOR = float(os.getenv('ORACLE_BOX_FACTOR', '40'))
ORACLE_KMAX_FACTOR = float(os.getenv('ORACLE_KMAX_FACTOR', '8'))
ORACLE_RECURRENCE_FACTOR = float(os.getenv('ORACLE_RECURRENCE_FACTOR', '5'))

# Report settings
CSV_FLOAT_FORMAT = os.getenv('CSV_FLOAT_FORMAT', '%.17g')
DEFAULT_JOBS = int(os.getenv('DEFAULT_JOBS', '1'))
ENERGY_DENSITY_MARGIN = float(os.getenv('ENERGY_DENSITY_MARGIN', '0.2'))
