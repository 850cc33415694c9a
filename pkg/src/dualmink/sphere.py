"""Quadrature on the unit sphere S^{n-1}.

Two grid schemes are provided. The product-angle scheme applies iterated
Gauss-Legendre rules to the angular parametrization

    u = (cos t_1, sin t_1 cos t_2, ..., sin t_1 ... sin t_{n-2} cos p,
         sin t_1 ... sin t_{n-2} sin p)

with the sin-power surface Jacobian sin^{n-2} t_1 ... sin t_{n-2} carried by
the weights.  The Monte Carlo scheme draws seeded Gaussian directions.  Both
schemes emit exact antipodal node pairs (u, -u) with equal weights, so even
integrands integrate consistently and odd integrands cancel.

Weights carry full surface measure: they sum to the sphere area n*omega_n.
Normalizations belong to calling code.

The module also implements the split angular coordinates

    u = (u1 cos p cos t, u2 cos p sin t, u3 sin p)

for u1 in S^{k-1}, u2 in S^{j-1}, u3 in S^{n-k-j-1} and t, p in [0, pi/2],
whose surface Jacobian is cos^{k+j-1} p sin^{n-k-j-1} p cos^{k-1} t sin^{j-1} t.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import CapabilityError, DomainError, EvaluationError
from .validation import as_float_array, check_unit_vectors

MAX_PRODUCT_NODES = 20_000_000

PRODUCT_ANGLE = "product-angle"
MONTE_CARLO = "monte-carlo"


def unit_ball_volume(n: int) -> float:
    """Volume omega_n of the unit ball in R^n."""
    return math.pi ** (n / 2) / math.gamma(n / 2 + 1)


def sphere_area(n: int) -> float:
    """Surface area n*omega_n of S^{n-1}."""
    return n * unit_ball_volume(n)


def _gauss_legendre(resolution: int, lo: float, hi: float):
    """Gauss-Legendre nodes/weights mapped to [lo, hi]."""
    x, w = leggauss(resolution)
    half = 0.5 * (hi - lo)
    return lo + half * (x + 1.0), half * w


@dataclass(frozen=True)
class SphericalGrid:
    """Quadrature nodes and surface-measure weights on S^{n-1}.

    Nodes come in exact antipodal pairs with equal weights.  Grids are
    immutable; integration on a shared grid is safe to run concurrently.
    """

    nodes: np.ndarray
    weights: np.ndarray
    dim: int
    scheme: str
    resolution: int
    seed: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "nodes", np.ascontiguousarray(self.nodes, dtype=float))
        object.__setattr__(self, "weights", np.ascontiguousarray(self.weights, dtype=float))
        self.nodes.setflags(write=False)
        self.weights.setflags(write=False)
        if self.nodes.ndim != 2 or self.nodes.shape[0] != self.weights.shape[0]:
            raise DomainError("grid nodes and weights are inconsistent")
        if np.any(self.weights <= 0):
            raise DomainError("grid weights must be strictly positive")

    @property
    def size(self) -> int:
        return self.nodes.shape[0]

    def integrate(self, f) -> float:
        return integrate(self, f)

    def reflected(self) -> "SphericalGrid":
        """Grid with every node replaced by its antipode (same weights)."""
        return SphericalGrid(-self.nodes, self.weights, self.dim, self.scheme,
                             self.resolution, self.seed)


def _generic_rotation(n: int) -> np.ndarray:
    """Fixed full-rank rotation decorrelating the rule from coordinate axes.

    Product-angle rings align badly with integrand kinks that follow the
    coordinate planes (polytope radial functions!); a generic rotation of the
    node set restores the expected convergence there.  Deterministic.
    """
    rng = np.random.default_rng(1889)
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    return q * np.sign(np.diag(r))


def _product_angle_half(n: int, resolution: int):
    """Half-sphere product rule; the caller mirrors it through the origin.

    Polar angles get `resolution` Gauss-Legendre nodes on [0, pi]; the
    azimuth gets `resolution` nodes on [0, pi] covering half the circle.
    """
    t_nodes, t_weights = _gauss_legendre(resolution, 0.0, math.pi)
    grids = [(t_nodes, t_weights * np.sin(t_nodes) ** (n - 1 - i)) for i in range(1, n - 1)]
    grids.append(_gauss_legendre(resolution, 0.0, math.pi))  # azimuth, unit Jacobian

    angle_mesh = np.meshgrid(*(g[0] for g in grids), indexing="ij")
    weight_mesh = np.meshgrid(*(g[1] for g in grids), indexing="ij")
    angles = np.stack([a.ravel() for a in angle_mesh], axis=1)
    weights = np.prod(np.stack([w.ravel() for w in weight_mesh], axis=1), axis=1)

    nodes = np.empty((angles.shape[0], n))
    sin_running = np.ones(angles.shape[0])
    for i in range(n - 2):
        nodes[:, i] = sin_running * np.cos(angles[:, i])
        sin_running = sin_running * np.sin(angles[:, i])
    nodes[:, n - 2] = sin_running * np.cos(angles[:, -1])
    nodes[:, n - 1] = sin_running * np.sin(angles[:, -1])
    return nodes, weights


def build_grid(n: int, resolution: int, scheme: str | None = None,
               seed: int | None = None) -> SphericalGrid:
    """Build a quadrature grid on S^{n-1}.

    Parameters
    ----------
    n : int
        Ambient dimension, n >= 2.
    resolution : int
        Product-angle: Gauss-Legendre nodes per angle (total 2*resolution^(n-1)
        nodes).  Monte Carlo: total node count, rounded up to an even number.
    scheme : str, optional
        "product-angle" or "monte-carlo".  Default: product-angle for n <= 4,
        Monte Carlo for n >= 5.
    seed : int, optional
        Monte Carlo seed; defaults to 0 for reproducibility.
    """
    if n < 2:
        raise DomainError(f"grid dimension must be at least 2, got {n}")
    if resolution < 8:
        raise DomainError(f"resolution must be at least 8, got {resolution}")
    if scheme is None:
        scheme = PRODUCT_ANGLE if n <= 4 else MONTE_CARLO

    if scheme == PRODUCT_ANGLE:
        total = 2 * resolution ** (n - 1)
        if total > MAX_PRODUCT_NODES:
            raise CapabilityError(
                f"product-angle grid would need {total} nodes in dimension {n} "
                f"(limit {MAX_PRODUCT_NODES}); use the monte-carlo scheme"
            )
        half_nodes, half_weights = _product_angle_half(n, resolution)
        half_nodes = half_nodes @ _generic_rotation(n).T
        nodes = np.vstack([half_nodes, -half_nodes])
        weights = np.concatenate([half_weights, half_weights])
        return SphericalGrid(nodes, weights, n, scheme, resolution, None)

    if scheme == MONTE_CARLO:
        if seed is None:
            seed = 0
        pairs = (resolution + 1) // 2
        rng = np.random.default_rng(seed)
        x = rng.standard_normal((pairs, n))
        x /= np.linalg.norm(x, axis=1, keepdims=True)
        nodes = np.vstack([x, -x])
        weights = np.full(2 * pairs, sphere_area(n) / (2 * pairs))
        return SphericalGrid(nodes, weights, n, scheme, resolution, seed)

    raise DomainError(f"unknown grid scheme {scheme!r}")


def integrate(grid: SphericalGrid, f) -> float:
    """Integrate f over S^{n-1} as sum_i w_i f(u_i).

    `f` may be vectorized (mapping an (N, n) array to an (N,) array) or accept
    a single direction at a time.  A non-finite value raises EvaluationError
    carrying the offending node.
    """
    values = None
    if not callable(f):
        raise DomainError("integrand must be callable")
    try:
        out = np.asarray(f(grid.nodes), dtype=float)
        if out.shape == (grid.size,):
            values = out
    except Exception:
        values = None
    if values is None:
        values = np.fromiter((float(f(u)) for u in grid.nodes), dtype=float,
                             count=grid.size)
    bad = ~np.isfinite(values)
    if np.any(bad):
        i = int(np.argmax(bad))
        raise EvaluationError(
            f"integrand returned {values[i]} at node {grid.nodes[i].tolist()}",
            node=grid.nodes[i].copy(),
        )
    return float(np.dot(grid.weights, values))


def general_coords_jacobian(n: int, k: int, j: int, theta, phi):
    """Surface Jacobian of the (k, j, n-k-j) angular split.

    Returns cos^{k+j-1}(phi) sin^{n-k-j-1}(phi) cos^{k-1}(theta) sin^{j-1}(theta)
    for theta, phi in [0, pi/2].  Scalars or broadcastable arrays are accepted.
    """
    if k < 1 or j < 1:
        raise DomainError(f"split parts must be positive, got k={k}, j={j}")
    if k + j >= n:
        raise DomainError(f"split requires k + j < n, got k={k}, j={j}, n={n}")
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    if np.any(theta < -1e-15) or np.any(theta > math.pi / 2 + 1e-15):
        raise DomainError("theta must lie in [0, pi/2]")
    if np.any(phi < -1e-15) or np.any(phi > math.pi / 2 + 1e-15):
        raise DomainError("phi must lie in [0, pi/2]")
    jac = (np.cos(phi) ** (k + j - 1) * np.sin(phi) ** (n - k - j - 1)
           * np.cos(theta) ** (k - 1) * np.sin(theta) ** (j - 1))
    return jac if jac.ndim else float(jac)


@dataclass(frozen=True)
class GeneralCoords:
    """A point of S^{n-1} in split angular coordinates.

    The split is (k, j, n-k-j) with k, j >= 1 and k + j < n; u1, u2, u3 are
    unit vectors on the corresponding sub-spheres (S^0 = {-1, +1} is encoded
    as a length-1 array).
    """

    n: int
    k: int
    j: int
    theta: float
    phi: float
    u1: np.ndarray
    u2: np.ndarray
    u3: np.ndarray

    def __post_init__(self):
        if self.k < 1 or self.j < 1 or self.k + self.j >= self.n:
            raise DomainError("invalid split: need k, j >= 1 and k + j < n")
        if not (0 <= self.theta <= math.pi / 2 and 0 <= self.phi <= math.pi / 2):
            raise DomainError("theta and phi must lie in [0, pi/2]")
        for name, u, d in (("u1", self.u1, self.k), ("u2", self.u2, self.j),
                           ("u3", self.u3, self.n - self.k - self.j)):
            a = as_float_array(u, name)
            if a.shape != (d,):
                raise DomainError(f"{name} must have shape ({d},), got {a.shape}")
            if abs(np.linalg.norm(a) - 1.0) > 1e-12:
                raise DomainError(f"{name} must be a unit vector")
            object.__setattr__(self, name, a)

    def to_vector(self) -> np.ndarray:
        """Reconstruct the ambient unit vector (u1 cp ct, u2 cp st, u3 sp)."""
        cp, sp = math.cos(self.phi), math.sin(self.phi)
        ct, st = math.cos(self.theta), math.sin(self.theta)
        return np.concatenate([self.u1 * (cp * ct), self.u2 * (cp * st), self.u3 * sp])

    def jacobian(self) -> float:
        return general_coords_jacobian(self.n, self.k, self.j, self.theta, self.phi)


def subsphere_nodes(d: int, resolution: int):
    """Nodes/weights on S^{d-1} embedded in R^d; S^0 is the exact pair {-1, +1}."""
    if d < 1:
        raise DomainError(f"sub-sphere dimension must be >= 1, got {d}")
    if d == 1:
        return np.array([[1.0], [-1.0]]), np.array([1.0, 1.0])
    g = build_grid(d, resolution)
    return g.nodes, g.weights


def integrate_split(f: Callable, n: int, k: int, j: int, resolution: int = 32) -> float:
    """Integrate f over S^{n-1} through the (k, j, n-k-j) split coordinates.

    Cross-checks `integrate`: the factorized measure must reproduce direct
    quadrature for any integrand both rules resolve.
    """
    if k < 1 or j < 1 or k + j >= n:
        raise DomainError(f"split requires k, j >= 1 and k + j < n, got ({k}, {j}, {n})")
    u1_nodes, u1_w = subsphere_nodes(k, resolution)
    u2_nodes, u2_w = subsphere_nodes(j, resolution)
    u3_nodes, u3_w = subsphere_nodes(n - k - j, resolution)
    theta, w_theta = _gauss_legendre(resolution, 0.0, math.pi / 2)
    phi, w_phi = _gauss_legendre(resolution, 0.0, math.pi / 2)

    total = 0.0
    jac = general_coords_jacobian(n, k, j, theta[:, None], phi[None, :])
    ct, st = np.cos(theta), np.sin(theta)
    cp, sp = np.cos(phi), np.sin(phi)
    for a, wa in zip(u1_nodes, u1_w):
        for b, wb in zip(u2_nodes, u2_w):
            for c, wc in zip(u3_nodes, u3_w):
                # directions over the (theta, phi) mesh, shape (T, P, n)
                block1 = a[None, None, :] * (cp[None, :] * ct[:, None])[:, :, None]
                block2 = b[None, None, :] * (cp[None, :] * st[:, None])[:, :, None]
                block3 = c[None, None, :] * sp[None, None, :] * np.ones_like(ct)[:, None, None]
                u = np.concatenate([block1, block2, block3], axis=2)
                vals = np.asarray(f(u.reshape(-1, n)), dtype=float).reshape(len(theta), len(phi))
                total += wa * wb * wc * float(
                    np.einsum("t,p,tp,tp->", w_theta, w_phi, jac, vals)
                )
    return total
