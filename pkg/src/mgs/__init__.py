"""Multi-graph bounded-suboptimal search over implicit graphs."""
from .core import (BoundsError, ConsistencyError, Domain, GoalCondition, InvalidQueryError,
                   PlanningError, PlanResult, Query, SearchNode, Transition, key_of,
                   reconstruct_path)
from .focal import FocalQueue, plan_single, pop_focal, push_or_improve
from .multigraph import MgsConfig, MultiGraphSearch, mgs_plan
from .occupancy import OccupancyGrid

__version__ = "0.1.0"

__all__ = [
    "BoundsError", "ConsistencyError", "Domain", "FocalQueue", "GoalCondition",
    "InvalidQueryError", "MgsConfig", "MultiGraphSearch", "OccupancyGrid", "PlanResult",
    "PlanningError", "Query", "SearchNode", "Transition", "key_of", "mgs_plan",
    "plan_single", "pop_focal", "push_or_improve", "reconstruct_path",
]
