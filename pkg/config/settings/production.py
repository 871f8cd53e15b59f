# config/settings/production.py
from .base import *

DEBUG = False

# Production-specific settings
SECURE_SSL_REDIRECT = True
SESSION_COOKIE_SECURE = True
CSRF_COOKIE_SECURE = True
SECURE_CONTENT_TYPE_NOSNIFF = True
SECURE_HSTS_SECONDS = 31536000  # 1 year
SECURE_HSTS_INCLUDE_SUBDOMAINS = True

# Workers run the checks; commands dispatch to them by default
APSLAB_USE_CELERY = os.getenv('APSLAB_USE_CELERY', 'True') == 'True'
APSLAB_JOBS = int(os.getenv('APSLAB_JOBS', '4'))
