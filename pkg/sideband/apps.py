from django.apps import AppConfig
from django.conf import settings
import logging

logger = logging.getLogger(__name__)


class SidebandConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'sideband'
    verbose_name = 'Sideband resonance toolkit'

    def ready(self):
        # Make sure the output directory exists before any command writes to it
        try:
            settings.SIDEBAND_OUTPUT_DIR.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            logger.warning(f"Could not create output directory {settings.SIDEBAND_OUTPUT_DIR}: {e}")
