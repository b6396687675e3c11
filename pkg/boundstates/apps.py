from django.apps import AppConfig


class BoundStatesConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'boundstates'
