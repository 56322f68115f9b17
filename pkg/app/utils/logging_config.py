import logging
import sys
from typing import Optional

from app.core.config import settings


def setup_logging(level: Optional[str] = None):
    log_level = (level or settings.log_level).upper()
    logging.basicConfig(
        level=log_level,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        handlers=[
            # stdout carries command output; keep it byte-stable
            logging.StreamHandler(sys.stderr)
        ],
        force=True,
    )
    # Suppress noisy logs from libraries if necessary
    logging.getLogger("httpx").setLevel(logging.WARNING)

    logger = logging.getLogger(__name__)
    logger.debug(f"Logging configured with level: {log_level}")
