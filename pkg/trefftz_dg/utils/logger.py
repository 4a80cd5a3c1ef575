import logging
import os
from logging.handlers import RotatingFileHandler

from dotenv import load_dotenv

load_dotenv()  # TREFFTZ_DG_LOG_DIR / TREFFTZ_DG_LOG_LEVEL may live in .env

LOG_DIR = os.getenv("TREFFTZ_DG_LOG_DIR", "logs")
LOG_FILE = os.path.join(LOG_DIR, "trefftz_dg.log")
LOG_LEVEL = getattr(logging, os.getenv("TREFFTZ_DG_LOG_LEVEL", "INFO").upper(), logging.INFO)

# Create log directory if it doesn't exist
os.makedirs(LOG_DIR, exist_ok=True)

log_formatter = logging.Formatter('%(asctime)s - %(name)s - %(levelname)s - %(message)s')

# File handler
file_handler = RotatingFileHandler(LOG_FILE, maxBytes=10*1024*1024, backupCount=5) # 10MB per file, 5 backups
file_handler.setFormatter(log_formatter)
file_handler.setLevel(LOG_LEVEL)

# Console handler
console_handler = logging.StreamHandler()
console_handler.setFormatter(log_formatter)
console_handler.setLevel(LOG_LEVEL)

def get_logger(name):
    """Gets a configured logger instance."""
    logger = logging.getLogger(name)
    logger.setLevel(LOG_LEVEL)

    # Avoid adding handlers multiple times
    if not logger.handlers:
        logger.addHandler(file_handler)
        logger.addHandler(console_handler)

    return logger


def set_console_level(level: int):
    """Adjusts verbosity of the console handler (the CLI uses this for --quiet runs)."""
    console_handler.setLevel(level)
