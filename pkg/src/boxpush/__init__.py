"""Multi-objective optimizers and a two-robot box-pushing planner."""

from .dominance import dominates, nondominated_filter
from .mopso import MOPSO, Archive, MopsoConfig, run_mopso
from .nsga2 import NSGA2, Nsga2Config, run_nsga2

__version__ = "0.1.0"

__all__ = [
    "MOPSO",
    "NSGA2",
    "Archive",
    "MopsoConfig",
    "Nsga2Config",
    "dominates",
    "nondominated_filter",
    "run_mopso",
    "run_nsga2",
]
