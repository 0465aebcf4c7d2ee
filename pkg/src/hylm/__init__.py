"""hylm: pseudo-spectral lab for the hydrostatic limit of thin-domain flow.

Solves the aspect-ratio-scaled anisotropic Navier-Stokes system and the
primitive equations with horizontal viscosity from shared well-prepared
initial data, and measures how fast the two trajectories converge as the
aspect ratio shrinks.
"""

__version__ = "0.1.0"

from .kernels import backend_name

__all__ = ["backend_name", "__version__"]
