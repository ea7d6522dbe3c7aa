import os
from dotenv import load_dotenv

load_dotenv()

# Logs & directories
LOG_DIR = os.getenv("LOG_DIR", "logs")
LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO").upper()
LOG_MAX_BYTES = int(os.getenv("LOG_MAX_BYTES", "1000000"))
LOG_BACKUP_COUNT = int(os.getenv("LOG_BACKUP_COUNT", "5"))
OUT_DIR = os.getenv("OUT_DIR", "results")

# Monte Carlo execution (never changes results, only wall time)
MC_WORKERS = max(1, int(os.getenv("MC_WORKERS", "1")))
MC_CHUNK_TRIALS = max(1, int(os.getenv("MC_CHUNK_TRIALS", "4096")))

# Tolerance ladder
ALGEBRAIC_TOL = 1e-10          # identities, relative to 1 + max diagonal
EQUIVALENCE_TOL = 1e-9         # two computational paths for the same quantity
HERMITIAN_ASYMMETRY_TOL = 1e-9 # relative, before symmetrization
DERIVED_PIVOT_SLACK = 1e6     # negative round-off band for Grams computed from checked Grams
STANDARD_ERRORS = 5.0          # statistical checks
GENIE_REL_TOL = 0.03           # per-stage variance vs. R_ee pivot

# Random-codebook experiment: n * R <= cap (bits)
CODEBOOK_MAX_BITS = 14

# Bundled data
DATA_DIR = os.path.join(os.path.dirname(os.path.dirname(__file__)), "data")
SCENARIO_DIR = os.path.join(DATA_DIR, "scenarios")
