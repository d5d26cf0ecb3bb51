from .config import ExperimentConfig as ExperimentConfig
from .config import load_config as load_config
from .harness import run_realization as run_realization
from .harness import run_sweep as run_sweep
from .types import NomaVLCException as NomaVLCException
