"""Numerical geometric measure theory in the Heisenberg group H^n.

Points are arrays ``[x_1..x_n, y_1..y_n, t]``.  Submodules:

``group``         group law, dilations, norms, cylinders, the left-invariant frame
``fields``        scalar fields, horizontal gradients, the W field
``surface``       parametrized patches, intrinsic graphs, perimeter quadrature
``slicing``       level-set extraction by marching simplices
``coarea``        two-sided coarea checks
``excess``        cylindrical excess, height profiles, projection identities
``isoperimetric`` Monte Carlo ratios on the sections Omega_s
``hausdorff``     box-ball coverings and box-counting dimension
"""

__version__ = "0.1.0"

from .exceptions import (  # noqa: E402
    CharacteristicPoint,
    CoverageError,
    CriticalLevel,
    DegenerateGradient,
    DegeneratePatch,
    DegenerateSlice,
    HeisError,
    InsufficientRange,
    InsufficientSampling,
    InvalidArgument,
    PreconditionViolated,
)

__all__ = [
    "CharacteristicPoint",
    "CoverageError",
    "CriticalLevel",
    "DegenerateGradient",
    "DegeneratePatch",
    "DegenerateSlice",
    "HeisError",
    "InsufficientRange",
    "InsufficientSampling",
    "InvalidArgument",
    "PreconditionViolated",
    "__version__",
]
