"""Channel scheduling for IoT networks with spatially correlated activation.

Estimates pairwise joint activation probabilities from an alarm-epicenter
simulation, evaluates the exact collision model and its pairwise upper
bound, and minimizes the bound over hard channel assignments exactly
(branch-and-bound) or heuristically (K-Medoids variants).
"""

from corrsched.model import (
    Assignment,
    CollisionReport,
    JointActivationMatrix,
    NetworkConfig,
    ScheduleMatrix,
)

__version__ = "0.1.0"

__all__ = [
    "Assignment",
    "CollisionReport",
    "JointActivationMatrix",
    "NetworkConfig",
    "ScheduleMatrix",
    "__version__",
]
