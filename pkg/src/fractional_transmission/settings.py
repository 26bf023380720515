"""Process-level settings read from the environment (and an optional .env file)."""
import logging
import os

from dotenv import load_dotenv

# Load environment variables
load_dotenv()

logger = logging.getLogger(__name__)

THREADS_ENV_VAR = "FRACTIONAL_TRANSMISSION_THREADS"


def thread_count() -> int:
    """Number of worker threads for mode solves and oracle runs.

    Falls back to 1 when the variable is unset or malformed.
    """
    raw = os.getenv(THREADS_ENV_VAR)
    if not raw:
        return 1
    try:
        value = int(raw)
    except ValueError:
        logger.warning(f"Ignoring non-integer {THREADS_ENV_VAR}={raw!r}")
        return 1
    return max(1, value)
