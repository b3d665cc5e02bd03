from django.apps import AppConfig


class SmoothingConfig(AppConfig):
    name = 'smoothing'
    verbose_name = 'Kernel smoothing'

    def ready(self):
        """Import the expectation module so the kernel backend is registered"""
        import smoothing.expectation  # noqa: F401
