"""Input validation helpers shared by every module.

These mirror the role of ``sklearn.utils.validation.check_array``: coerce to
float arrays of the right trailing shape and refuse non-finite data early.
"""

from __future__ import annotations

import numpy as np

from .exceptions import InvalidArgument


def dim_from_n(n: int) -> int:
    n = check_n(n)
    return 2 * n + 1


def check_n(n) -> int:
    if isinstance(n, bool) or int(n) != n or int(n) < 1:
        raise InvalidArgument(f"dimension n must be an integer >= 1, got {n!r}")
    return int(n)


def n_from_dim(d: int) -> int:
    if d < 3 or d % 2 == 0:
        raise InvalidArgument(
            f"points of H^n have 2n+1 >= 3 (odd) coordinates, got trailing size {d}"
        )
    return (d - 1) // 2


def check_points(p, n: int | None = None, *, name: str = "p") -> np.ndarray:
    """Return ``p`` as a float array of shape ``(..., 2n+1)``.

    Raises ``InvalidArgument`` on NaN/Inf or on a trailing size that is not
    a valid Heisenberg dimension (or does not match ``n`` when given).
    """
    arr = np.asarray(p, dtype=float)
    if arr.ndim == 0:
        raise InvalidArgument(f"{name} must have at least one axis")
    d = arr.shape[-1]
    nn = n_from_dim(d)
    if n is not None and nn != check_n(n):
        raise InvalidArgument(f"{name} has {d} coordinates, expected {2 * n + 1}")
    if not np.all(np.isfinite(arr)):
        raise InvalidArgument(f"{name} contains non-finite coordinates")
    return arr


def check_positive(value, name: str) -> float:
    v = float(value)
    if not np.isfinite(v) or v <= 0:
        raise InvalidArgument(f"{name} must be a finite positive number, got {value!r}")
    return v


def check_same_n(p: np.ndarray, q: np.ndarray) -> int:
    if p.shape[-1] != q.shape[-1]:
        raise InvalidArgument(
            f"points live in different groups ({p.shape[-1]} vs {q.shape[-1]} coordinates)"
        )
    return n_from_dim(p.shape[-1])
