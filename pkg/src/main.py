import sys
import logging

from src.interfaces.cli import cli_main
from src.utils.config import Settings, configure_logging

logger = logging.getLogger(__name__)


def main(argv=None):
    """Main entry point for the ``circle-chains`` command."""
    settings = Settings.from_env()
    configure_logging(settings)
    logger.info("Starting circle-chains...")

    try:
        code = cli_main(argv, settings)
    except Exception as e:
        logger.error(f"Unexpected error in circle-chains: {e}", exc_info=True)
        sys.exit(2)
    sys.exit(code)


if __name__ == "__main__":
    main()
