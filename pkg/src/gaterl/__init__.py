"""gaterl: a reinforcement-learned gate deciding when a simulated learner
may access generative-AI assistance, plus the training, evaluation, and
serving machinery around it."""

from .domain import Action, FeatureCaps, GateObservation, RewardConfig, TaskSpec, featurize
from .env import GateEnv, StudentSetup, run_fixed_policy
from .errors import GaterlError, ValidationError
from .reward import RewardBreakdown, total_reward
from .student import PopulationSpec, StudentModel

__version__ = "1.0.0"

__all__ = [
    "Action",
    "FeatureCaps",
    "GateEnv",
    "GateObservation",
    "GaterlError",
    "PopulationSpec",
    "RewardBreakdown",
    "RewardConfig",
    "StudentModel",
    "StudentSetup",
    "TaskSpec",
    "ValidationError",
    "featurize",
    "run_fixed_policy",
    "total_reward",
    "__version__",
]
