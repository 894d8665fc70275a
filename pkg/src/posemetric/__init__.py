"""Rotation/pose representations, distances, pose losses and trajectory errors."""
from .errors import PoseError
from .poses import Transform

__version__ = "0.1.0"
__all__ = ["PoseError", "Transform", "__version__"]
