"""Optimal tangential boundary stirring on the unit disk."""
__version__ = "0.1.0"

from .control import ControlBasis  # noqa: E402
from .mesh import build_disk_mesh  # noqa: E402
from .optimizer import OptimizerConfig, load_checkpoint, run_basic, run_relay  # noqa: E402
from .problem import MixingProblem, initial_condition  # noqa: E402

__all__ = ["ControlBasis", "MixingProblem", "OptimizerConfig", "build_disk_mesh",
           "initial_condition", "load_checkpoint", "run_basic", "run_relay", "__version__"]
