from django.apps import AppConfig


class CoreConfig(AppConfig):
    name = 'core'
    verbose_name = 'Composite functionals'

    def ready(self):
        """Import the composite module so the empirical backend is registered"""
        import core.composite  # noqa: F401
