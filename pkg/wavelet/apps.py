from django.apps import AppConfig


class WaveletConfig(AppConfig):
    name = 'wavelet'
    verbose_name = 'Wavelet density estimation'

    def ready(self):
        """Import the density module so the wavelet backend is registered"""
        import wavelet.density  # noqa: F401
