from .arm import DEG, PlanarArmDomain, arm_fk, dls_ik
from .grid import GridDomain
from .se2 import Se2Domain

__all__ = ["DEG", "GridDomain", "PlanarArmDomain", "Se2Domain", "arm_fk", "dls_ik"]
