import os
import logging

import dotenv

dotenv.load_dotenv()

# Supply and solver defaults
DEFAULT_VDD = float(os.getenv("TRITSIM_VDD", "0.9"))
DEFAULT_LEVEL_TOLERANCE = float(os.getenv("TRITSIM_LEVEL_TOLERANCE", "0.05"))
DEFAULT_MAX_ITERATIONS = int(os.getenv("TRITSIM_MAX_ITERATIONS", "100"))
DEFAULT_VTC_STEPS = int(os.getenv("TRITSIM_VTC_STEPS", "1000"))

# Monte-Carlo defaults: 3 sigma of 5% is the +/-15% diameter corner
DEFAULT_SEED = int(os.getenv("TRITSIM_SEED", "42"))
DEFAULT_MC_TRIALS = int(os.getenv("TRITSIM_MC_TRIALS", "1000"))
DEFAULT_MC_SIGMA = float(os.getenv("TRITSIM_MC_SIGMA", "0.05"))
DEFAULT_MC_TRUNCATION = float(os.getenv("TRITSIM_MC_TRUNCATION", "3.0"))

LOG_LEVEL = os.getenv("TRITSIM_LOG_LEVEL", "INFO")

SIM_SERVICE_HOST = os.getenv("SIM_SERVICE_HOST", "0.0.0.0")
SIM_SERVICE_PORT = int(os.getenv("SIM_SERVICE_PORT", "5010"))


def configure_logging(level=None):
    """Configure root logging for entry points (CLI, HTTP service)."""
    logging.basicConfig(
        level=getattr(logging, (level or LOG_LEVEL).upper(), logging.INFO),
        format="%(asctime)s - %(levelname)s - %(message)s",
    )
