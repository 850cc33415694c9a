"""Input validation helpers for arrays of directions, frames, and parameters."""
from __future__ import annotations

import numpy as np

from .errors import DomainError

UNIT_TOL = 1e-12
ORTHO_TOL = 1e-12


def as_float_array(x, name: str, ndim: int | None = None) -> np.ndarray:
    a = np.asarray(x, dtype=float)
    if ndim is not None and a.ndim != ndim:
        raise DomainError(f"{name} must be a {ndim}-dimensional array, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise DomainError(f"{name} contains non-finite entries")
    return a


def check_unit_vectors(u, name: str = "directions") -> np.ndarray:
    """Validate one direction or a stack of directions against |u| = 1."""
    a = as_float_array(u, name)
    if a.ndim == 1:
        a = a[None, :]
    if a.ndim != 2 or a.shape[1] < 2:
        raise DomainError(f"{name} must have shape (N, n) with n >= 2, got {np.shape(u)}")
    norms = np.linalg.norm(a, axis=1)
    bad = np.abs(norms - 1.0) > UNIT_TOL
    if np.any(bad):
        i = int(np.argmax(bad))
        raise DomainError(f"{name}[{i}] has norm {norms[i]:.17g}, expected 1 within {UNIT_TOL}")
    return a


def check_orthonormal_frame(axes, n: int | None = None, name: str = "axes") -> np.ndarray:
    a = as_float_array(axes, name, ndim=2)
    if a.shape[0] != a.shape[1]:
        raise DomainError(f"{name} must be square, got shape {a.shape}")
    if n is not None and a.shape[0] != n:
        raise DomainError(f"{name} must be {n}x{n}, got shape {a.shape}")
    gram = a @ a.T
    if np.max(np.abs(gram - np.eye(a.shape[0]))) > 1e-10:
        raise DomainError(f"{name} rows are not orthonormal within tolerance")
    return a


def check_positive(x, name: str) -> np.ndarray:
    a = as_float_array(x, name)
    if np.any(a <= 0):
        raise DomainError(f"{name} must be strictly positive")
    return a


def check_ascending(x, name: str) -> np.ndarray:
    a = as_float_array(x, name)
    if np.any(np.diff(a) < 0):
        raise DomainError(f"{name} must be sorted in ascending order")
    return a


def check_in_open_interval(x: float, lo: float, hi: float, name: str) -> float:
    x = float(x)
    if not (lo < x < hi):
        raise DomainError(f"{name} must lie in ({lo:g}, {hi:g}), got {x:g}")
    return x


def unit(v) -> np.ndarray:
    """Normalize a vector to unit length."""
    a = as_float_array(v, "vector")
    nrm = np.linalg.norm(a)
    if nrm == 0:
        raise DomainError("cannot normalize the zero vector")
    return a / nrm
