"""Origin-symmetric convex bodies: polytopes, ellipsoids, and product barriers.

Every body type is an immutable value with a support function h(v) =
max{x.v : x in K} and a radial function rho(u) = max{t > 0 : t u in K}.
Both are even by construction.  Polytopes are stored as one facet-normal
representative per antipodal pair together with its support number; the body
is the halfspace intersection {x : |x.v_i| <= h_i}, i.e. the Wulff shape of
the stored data.  Support numbers are kept exactly as given even when
reducible; `active_pairs` records which constraints touch the boundary.

Radial evaluation needs no vertex enumeration.  Vertices are computed lazily
(Qhull halfspace intersection, desk scale) and are needed only for support
values and Hausdorff distances.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.spatial import HalfspaceIntersection, QhullError

from .errors import DomainError, GeometryError
from .sphere import build_grid
from .validation import (as_float_array, check_ascending, check_orthonormal_frame,
                         check_positive, check_unit_vectors)

# Ties in the radial minimum (direction hits an edge or ridge) resolve to the
# lowest pair index; curvature-measure cell assignment inherits this rule.


def _as_batch(u, n):
    a = as_float_array(u, "direction")
    if a.ndim == 1:
        if a.shape != (n,):
            raise DomainError(f"direction must have length {n}, got {a.shape}")
        return a[None, :], True
    if a.ndim != 2 or a.shape[1] != n:
        raise DomainError(f"directions must have shape (N, {n}), got {a.shape}")
    return a, False


def _maybe_scalar(values, single):
    return float(values[0]) if single else values


def polytope_radial_data(normals: np.ndarray, support: np.ndarray, u):
    """Radial function of {x : |x.v_i| <= h_i} at directions u.

    rho(u) = min_i h_i / |u.v_i| over pairs with u.v_i != 0.
    """
    U, single = _as_batch(u, normals.shape[1])
    dots = np.abs(U @ normals.T)
    with np.errstate(divide="ignore"):
        ratios = np.where(dots > 0.0, support[None, :] / dots, np.inf)
    rho = ratios.min(axis=1)
    if np.any(~np.isfinite(rho)):
        raise GeometryError("unbounded direction: stored normals do not span R^n")
    return _maybe_scalar(rho, single)


def polytope_radial_argmin(normals: np.ndarray, support: np.ndarray, U: np.ndarray):
    """Radial values and the index of the pair attaining the minimum (ties: lowest)."""
    dots = np.abs(U @ normals.T)
    with np.errstate(divide="ignore"):
        ratios = np.where(dots > 0.0, support[None, :] / dots, np.inf)
    idx = ratios.argmin(axis=1)
    rho = ratios[np.arange(U.shape[0]), idx]
    if np.any(~np.isfinite(rho)):
        raise GeometryError("unbounded direction: stored normals do not span R^n")
    return rho, idx


@dataclass(frozen=True)
class SymmetricPolytope:
    """Origin-symmetric polytope {x : |x.v_i| <= h_i}."""

    normals: np.ndarray
    support: np.ndarray

    def __post_init__(self):
        normals = check_unit_vectors(self.normals, "normals")
        support = check_positive(self.support, "support")
        if support.ndim != 1 or support.shape[0] != normals.shape[0]:
            raise DomainError("support numbers must match the normal pairs")
        m, n = normals.shape
        if m < n:
            raise DomainError(f"need at least n = {n} normal pairs, got {m}")
        if np.linalg.matrix_rank(normals, tol=1e-10) < n:
            raise GeometryError("normals do not span R^n: body is unbounded")
        gram = np.abs(normals @ normals.T)
        np.fill_diagonal(gram, 0.0)
        if np.any(gram > 1.0 - 1e-12):
            i, j = np.unravel_index(int(np.argmax(gram)), gram.shape)
            raise DomainError(f"normal pairs {i} and {j} coincide (up to sign)")
        normals.setflags(write=False)
        support.setflags(write=False)
        object.__setattr__(self, "normals", normals)
        object.__setattr__(self, "support", support)

    @property
    def dim(self) -> int:
        return self.normals.shape[1]

    @property
    def npairs(self) -> int:
        return self.normals.shape[0]

    @cached_property
    def vertices(self) -> np.ndarray:
        """Vertex array from halfspace intersection (lazy, cached)."""
        n = self.dim
        a = np.vstack([self.normals, -self.normals])
        b = np.concatenate([self.support, self.support])
        halfspaces = np.hstack([a, -b[:, None]])
        try:
            hs = HalfspaceIntersection(halfspaces, np.zeros(n))
        except QhullError as exc:
            raise GeometryError(f"halfspace intersection failed: {exc}") from exc
        verts = np.asarray(hs.intersections, dtype=float)
        verts.setflags(write=False)
        return verts

    @cached_property
    def reduced_support(self) -> np.ndarray:
        """True support values of the body at the stored normals (<= support)."""
        vals = np.abs(self.vertices @ self.normals.T).max(axis=0)
        vals.setflags(write=False)
        return vals

    @cached_property
    def active_pairs(self) -> np.ndarray:
        """Which stored constraints touch the boundary of the body."""
        tol = 1e-9 * float(self.support.max())
        flags = self.reduced_support >= self.support - tol
        flags.setflags(write=False)
        return flags

    def radial(self, u):
        return polytope_radial_data(self.normals, self.support, u)

    def support_function(self, v):
        """Exact support value via the vertex set; even by construction."""
        V, single = _as_batch(v, self.dim)
        vals = np.abs(V @ self.vertices.T).max(axis=1)
        return _maybe_scalar(vals, single)

    def scale(self, c: float) -> "SymmetricPolytope":
        if c <= 0:
            raise DomainError("scale factor must be positive")
        return SymmetricPolytope(self.normals, c * self.support)

    def diameter(self) -> float:
        return 2.0 * float(np.linalg.norm(self.vertices, axis=1).max())


@dataclass(frozen=True)
class Ellipsoid:
    """Ellipsoid sum (x.e_i)^2 / a_i^2 <= 1 with orthonormal axes e_i."""

    axes: np.ndarray
    semiaxes: np.ndarray

    def __post_init__(self):
        axes = check_orthonormal_frame(self.axes, name="axes")
        semiaxes = check_positive(self.semiaxes, "semiaxes")
        check_ascending(semiaxes, "semiaxes")
        if semiaxes.shape != (axes.shape[0],):
            raise DomainError("need one semiaxis per axis")
        axes.setflags(write=False)
        semiaxes.setflags(write=False)
        object.__setattr__(self, "axes", axes)
        object.__setattr__(self, "semiaxes", semiaxes)

    @classmethod
    def ball(cls, n: int, radius: float = 1.0) -> "Ellipsoid":
        return cls(np.eye(n), np.full(n, float(radius)))

    @property
    def dim(self) -> int:
        return self.axes.shape[0]

    def radial(self, u):
        U, single = _as_batch(u, self.dim)
        y = U @ self.axes.T
        rho = np.sum(y ** 2 / self.semiaxes ** 2, axis=1) ** -0.5
        return _maybe_scalar(rho, single)

    def support_function(self, v):
        V, single = _as_batch(v, self.dim)
        y = V @ self.axes.T
        vals = np.sqrt(np.sum((self.semiaxes * y) ** 2, axis=1))
        return _maybe_scalar(vals, single)

    def scale(self, c: float) -> "Ellipsoid":
        if c <= 0:
            raise DomainError("scale factor must be positive")
        return Ellipsoid(self.axes, c * self.semiaxes)


def _masked_inverse(values: np.ndarray, numerator=1.0) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.where(values > 0.0, numerator / np.where(values > 0.0, values, 1.0), np.inf)


@dataclass(frozen=True)
class BarrierBody:
    """Product of an ellipsoid, a segment, and a ball in orthogonal blocks.

    G = {x : sum_{i<=k} (x.e_i)^2/a_i^2 <= 1, |x.e_{k+1}| <= a_{k+1},
         sum_{i>=k+2} (x.e_i)^2 <= 1} with 0 < a_1 <= ... <= a_{k+1} < 1.
    """

    axes: np.ndarray
    k: int
    params: np.ndarray

    def __post_init__(self):
        axes = check_orthonormal_frame(self.axes, name="axes")
        n = axes.shape[0]
        if n < 3:
            raise DomainError("barrier bodies need dimension n >= 3")
        if not (1 <= self.k <= n - 2):
            raise DomainError(f"barrier block size k must satisfy 1 <= k <= n-2, got {self.k}")
        params = check_positive(self.params, "params")
        check_ascending(params, "params")
        if params.shape != (self.k + 1,):
            raise DomainError(f"need k+1 = {self.k + 1} parameters, got {params.shape}")
        if params[-1] >= 1.0:
            raise DomainError("barrier parameters must be strictly below 1")
        axes.setflags(write=False)
        params.setflags(write=False)
        object.__setattr__(self, "axes", axes)
        object.__setattr__(self, "params", params)

    @classmethod
    def standard(cls, n: int, k: int, params) -> "BarrierBody":
        return cls(np.eye(n), k, np.asarray(params, dtype=float))

    @property
    def dim(self) -> int:
        return self.axes.shape[0]

    def ellipsoid_block_radial(self, u1):
        """Radial function of the k-dimensional ellipsoid block at u1 in S^{k-1}."""
        a = np.asarray(u1, dtype=float)
        single = a.ndim == 1
        if single:
            a = a[None, :]
        if a.shape[1] != self.k:
            raise DomainError(f"u1 must live in R^{self.k}")
        rho = np.sum(a ** 2 / self.params[: self.k] ** 2, axis=1) ** -0.5
        return _maybe_scalar(rho, single)

    def radial(self, u):
        U, single = _as_batch(u, self.dim)
        y = U @ self.axes.T
        k = self.k
        ell = np.sqrt(np.sum(y[:, :k] ** 2 / self.params[:k] ** 2, axis=1))
        seg = np.abs(y[:, k])
        ball = np.linalg.norm(y[:, k + 1:], axis=1)
        rho = np.minimum(_masked_inverse(ell),
                         np.minimum(_masked_inverse(seg, self.params[k]),
                                    _masked_inverse(ball)))
        return _maybe_scalar(rho, single)

    def support_function(self, v):
        V, single = _as_batch(v, self.dim)
        y = V @ self.axes.T
        k = self.k
        vals = (np.sqrt(np.sum((self.params[:k] * y[:, :k]) ** 2, axis=1))
                + self.params[k] * np.abs(y[:, k])
                + np.linalg.norm(y[:, k + 1:], axis=1))
        return _maybe_scalar(vals, single)


@dataclass(frozen=True)
class Cylinder:
    """Product of a k-dimensional ellipsoid and an (n-k)-dimensional unit ball."""

    axes: np.ndarray
    k: int
    params: np.ndarray

    def __post_init__(self):
        axes = check_orthonormal_frame(self.axes, name="axes")
        n = axes.shape[0]
        if not (1 <= self.k <= n - 1):
            raise DomainError(f"cylinder block size k must satisfy 1 <= k <= n-1, got {self.k}")
        params = check_positive(self.params, "params")
        check_ascending(params, "params")
        if params.shape != (self.k,):
            raise DomainError(f"need k = {self.k} parameters, got {params.shape}")
        axes.setflags(write=False)
        params.setflags(write=False)
        object.__setattr__(self, "axes", axes)
        object.__setattr__(self, "params", params)

    @classmethod
    def standard(cls, n: int, k: int, params) -> "Cylinder":
        return cls(np.eye(n), k, np.asarray(params, dtype=float))

    @property
    def dim(self) -> int:
        return self.axes.shape[0]

    def radial(self, u):
        U, single = _as_batch(u, self.dim)
        y = U @ self.axes.T
        ell = np.sqrt(np.sum(y[:, :self.k] ** 2 / self.params ** 2, axis=1))
        ball = np.linalg.norm(y[:, self.k:], axis=1)
        rho = np.minimum(_masked_inverse(ell), _masked_inverse(ball))
        return _maybe_scalar(rho, single)

    def support_function(self, v):
        V, single = _as_batch(v, self.dim)
        y = V @ self.axes.T
        vals = (np.sqrt(np.sum((self.params * y[:, :self.k]) ** 2, axis=1))
                + np.linalg.norm(y[:, self.k:], axis=1))
        return _maybe_scalar(vals, single)


@dataclass(frozen=True)
class LogWulffFamily:
    """Wulff shapes of h_i exp(t f_i) over a fixed normal set."""

    normals: np.ndarray
    base_support: np.ndarray
    direction: np.ndarray

    def __post_init__(self):
        normals = check_unit_vectors(self.normals, "normals")
        base = check_positive(self.base_support, "base_support")
        f = as_float_array(self.direction, "direction")
        if base.shape != (normals.shape[0],) or f.shape != (normals.shape[0],):
            raise DomainError("base_support and direction must match the normal set")
        for arr in (normals, base, f):
            arr.setflags(write=False)
        object.__setattr__(self, "normals", normals)
        object.__setattr__(self, "base_support", base)
        object.__setattr__(self, "direction", f)

    def member(self, t: float) -> SymmetricPolytope:
        return wulff_shape(self.normals, self.base_support * np.exp(t * self.direction))


Body = SymmetricPolytope | Ellipsoid | BarrierBody | Cylinder


def support_eval(body: Body, v):
    """Support function h(v); exact (vertex-based for polytopes), h(v) = h(-v)."""
    return body.support_function(v)


def radial_eval(body: Body, u):
    """Radial function rho(u); rho(u) = rho(-u)."""
    return body.radial(u)


def wulff_shape(normals, support) -> SymmetricPolytope:
    """Halfspace intersection {x : |x.v_i| <= h_i} with stored (reducible) data."""
    return SymmetricPolytope(np.asarray(normals, dtype=float),
                             np.asarray(support, dtype=float))


def log_wulff_member(family: LogWulffFamily, t: float) -> SymmetricPolytope:
    return family.member(t)


def barrier_radial(body: BarrierBody, coords) -> float:
    """Radial function of a barrier body in split coordinates, branch form.

    Evaluates the four-branch closed form over the (theta, phi) quadrant with
    branch boundaries arctan(a_{k+1}/rho_ell(u1)), arctan(cos(theta)/rho_ell(u1))
    and arctan(sin(theta)/a_{k+1}).  Must agree with the min-form radial
    function at every point; only the j = 1 split applies.
    """
    if coords.j != 1:
        raise DomainError("barrier radial evaluation requires a (k, 1) split")
    if coords.k != body.k or coords.n != body.dim:
        raise DomainError("split coordinates do not match the barrier body blocks")
    rho_bar = body.ellipsoid_block_radial(coords.u1)
    a_seg = float(body.params[body.k])
    theta, phi = coords.theta, coords.phi
    theta_star = math.atan2(a_seg, rho_bar)
    if theta <= theta_star:
        phi_star = math.atan2(math.cos(theta), rho_bar)
        if phi <= phi_star:
            return rho_bar / (math.cos(phi) * math.cos(theta))
        return 1.0 / math.sin(phi)
    phi_star = math.atan2(math.sin(theta), a_seg)
    if phi <= phi_star:
        return a_seg / (math.sin(theta) * math.cos(phi))
    return 1.0 / math.sin(phi)


def hausdorff_distance(a: Body, b: Body, resolution: int = 48) -> float:
    """Hausdorff distance max_v |h_A(v) - h_B(v)| over a dense direction grid.

    The reported value depends on the direction-grid resolution; it converges
    from below as the grid is refined.
    """
    if a.dim != b.dim:
        raise DomainError("bodies must share the ambient dimension")
    grid = build_grid(a.dim, resolution)
    return float(np.max(np.abs(a.support_function(grid.nodes)
                               - b.support_function(grid.nodes))))
