"""Comfort-optimal trajectory planning for planar nonholonomic robots."""
from .core import (
    BoundaryState, DynamicBounds, KinematicSample, PlanningProblem, WeightFactors,
)

__all__ = ["BoundaryState", "DynamicBounds", "KinematicSample", "PlanningProblem", "WeightFactors"]
__version__ = "0.1.0"
