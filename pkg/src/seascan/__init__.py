"""seascan: deterministic multi-UAV maritime search simulator.

Fixed-wing control and fillet path following, a lossy multi-hop relay radio,
range-only cooperative localization by stress majorization, camera/radar
sensing, non-informed sweep patterns and an informed MinMax-mTSP planner,
plus a Monte Carlo experiment harness.
"""

from seascan.kernel import BACKEND as KERNEL_BACKEND
from seascan.runner import RunMetrics, monte_carlo, run_mission
from seascan.scenario import Scenario, load_scenario
from seascan.world import MissionSim

__version__ = "0.1.0"

__all__ = [
    "KERNEL_BACKEND",
    "MissionSim",
    "RunMetrics",
    "Scenario",
    "load_scenario",
    "monte_carlo",
    "run_mission",
    "__version__",
]
