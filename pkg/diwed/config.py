"""Runtime configuration for the DIWED toolkit.

Values come from the environment (optionally a ``.env`` file in the working
directory). CLI flags and MCP tool arguments override them per call.
"""

import os
from pathlib import Path

from dotenv import load_dotenv

load_dotenv()

# Randomness
DEFAULT_SEED = int(os.getenv("DIWED_SEED", "2014"))

# See-saw
DEFAULT_RESTARTS = int(os.getenv("DIWED_RESTARTS", "50"))
DEFAULT_THREADS = int(os.getenv("DIWED_THREADS", "1"))
MAX_SWEEPS = int(os.getenv("DIWED_MAX_SWEEPS", "500"))
SEESAW_TOL = float(os.getenv("DIWED_SEESAW_TOL", "1e-9"))

# Certification
DEFAULT_SIGMAS = float(os.getenv("DIWED_SIGMAS", "3.0"))

LOG_LEVEL = os.getenv("DIWED_LOG_LEVEL", "WARNING")

# Numerical tolerances
VALIDITY_TOL = 1e-9
NORM_TOL = 1e-12
DEGENERACY_TOL = 1e-12

# Hard caps
MAX_ENUM_PARTIES = 10
MAX_STATE_QUBITS = 12
MAX_TRANSFORM_PARTIES = 20
MAX_FACET_CORR_PARTIES = 8
MAX_FACET_LOCAL_PARTIES = 6
MAX_SDP_PARTIES = 4

DATA_DIR = Path(__file__).parent / "data"
REFERENCE_VALUES_PATH = DATA_DIR / "reference_values.json"
