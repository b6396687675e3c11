from django.apps import AppConfig


class SelfEnergyConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'selfenergy'
