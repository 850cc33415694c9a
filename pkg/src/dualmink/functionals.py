"""Dual quermassintegrals and dual curvature measures.

The (n-q)-th dual quermassintegral of a star body about the origin is

    W(K, q) = (1/n) integral over S^{n-1} of rho_K(u)^q du,

homogeneous of degree q; q = n gives volume, q = 0 gives omega_n for every
body.  For integer q = i it equals (omega_n/omega_i) times the mean
i-dimensional volume of K intersected with a Haar-random i-dimensional
subspace, which this module estimates by Monte Carlo as an independent
cross-check.

The q-th dual curvature measure of a polytope assigns to each facet-normal
pair the rho^q-integral over the radial directions whose boundary point lies
on that facet pair.  On a grid this is realized by per-node argmin assignment
(each node joins the facet pair attaining its radial minimum), which makes
the total-measure identity sum(pair values) = W(K, q) exact at node level.

Barrier product bodies get three independent quermassintegral evaluations:
direct grid quadrature of the min-form radial function, the split-coordinate
decomposition into four angular integrals, and the rationalized (t, s) form
of those integrals with the improper tails mapped to (0, 1] via s -> 1/s.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss

from .bodies import (BarrierBody, Cylinder, SymmetricPolytope,
                     polytope_radial_argmin, wulff_shape)
from .errors import DomainError
from .measures import DiscreteEvenMeasure
from .sphere import SphericalGrid, subsphere_nodes, unit_ball_volume
from .validation import as_float_array


def dual_quermass(body, q: float, grid: SphericalGrid) -> float:
    """(1/n) integral of rho_K^q over the grid; degree-q homogeneous in K."""
    rho = body.radial(grid.nodes)
    return float(grid.weights @ rho ** float(q)) / grid.dim


def dual_quermass_grassmann(body, i: int, samples: int, seed: int,
                            subgrid_resolution: int = 48) -> float:
    """Monte Carlo dual quermassintegral through random subspace sections.

    Averages (omega_n/omega_i) V_i(K cut by xi) over Haar-random i-dimensional
    subspaces xi; per sample the section volume is (1/i) times the rho^i
    integral over the sub-sphere.  Serves as an independent oracle for
    `dual_quermass` at integer q = i.
    """
    n = body.dim
    if not (1 <= i <= n):
        raise DomainError(f"section dimension must satisfy 1 <= i <= n, got {i}")
    if samples < 1:
        raise DomainError("need at least one sample")
    sub_nodes, sub_weights = subsphere_nodes(i, subgrid_resolution)
    m = sub_nodes.shape[0]
    rng = np.random.default_rng(seed)
    chunk = max(1, min(samples, 4_000_000 // (m * n)))
    acc = 0.0
    done = 0
    while done < samples:
        c = min(chunk, samples - done)
        frames = np.linalg.qr(rng.standard_normal((c, n, i)))[0]  # (c, n, i)
        dirs = np.einsum("cni,mi->cmn", frames, sub_nodes).reshape(c * m, n)
        rho = np.asarray(body.radial(dirs)).reshape(c, m)
        acc += float((rho ** i @ sub_weights).sum()) / i
        done += c
    return unit_ball_volume(n) / unit_ball_volume(i) * acc / samples


@dataclass(frozen=True)
class CurvatureMeasure:
    """Pair-indexed dual curvature measure of a symmetric polytope."""

    normals: np.ndarray
    values: np.ndarray
    q: float

    @property
    def total(self) -> float:
        return float(self.values.sum())

    def to_measure(self) -> DiscreteEvenMeasure:
        """Drop zero pairs and repackage as a discrete even measure."""
        keep = self.values > 0
        if not np.any(keep):
            raise DomainError("curvature measure has no positive pair values")
        return DiscreteEvenMeasure(self.normals[keep], self.values[keep])


def polytope_curvature_data(normals: np.ndarray, support: np.ndarray, q: float,
                            grid: SphericalGrid):
    """Quermassintegral and per-pair curvature values from raw polytope data."""
    rho, idx = polytope_radial_argmin(normals, support, grid.nodes)
    contrib = grid.weights * rho ** float(q) / grid.dim
    values = np.bincount(idx, weights=contrib, minlength=normals.shape[0])
    return float(contrib.sum()), values


def dual_curvature(body: SymmetricPolytope, q: float, grid: SphericalGrid) -> CurvatureMeasure:
    """Dual curvature measure by per-node argmin cell assignment.

    Each grid node joins the facet pair attaining its radial minimum (its
    boundary point's outer normal); ties go to the lowest pair index.
    Inactive facet pairs receive the value 0.
    """
    _, values = polytope_curvature_data(body.normals, body.support, q, grid)
    return CurvatureMeasure(body.normals, values, float(q))


@dataclass(frozen=True)
class VariationalReport:
    lhs: float
    rhs: float
    rel_error: float


def variational_check(body: SymmetricPolytope, f, q: float, t_step: float,
                      grid: SphericalGrid) -> VariationalReport:
    """Finite-difference check of the first variation of the quermassintegral.

    Compares the central difference of t -> W([h exp(t f)], q) at t = 0
    against q * sum_i f_i * curvature_i on the same grid.
    """
    if q == 0:
        raise DomainError("q must be nonzero")
    if not (1e-6 <= t_step <= 1e-2):
        raise DomainError("t_step must lie in [1e-6, 1e-2]")
    f = as_float_array(f, "f", ndim=1)
    if f.shape[0] != body.npairs:
        raise DomainError("f must assign one value per normal pair")

    def w_at(t: float) -> float:
        rho, _ = polytope_radial_argmin(body.normals, body.support * np.exp(t * f),
                                        grid.nodes)
        return float(grid.weights @ rho ** float(q)) / grid.dim

    lhs = (w_at(t_step) - w_at(-t_step)) / (2.0 * t_step)
    curv = dual_curvature(body, q, grid)
    rhs = float(q) * float(f @ curv.values)
    rel = abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1e-300)
    return VariationalReport(lhs, rhs, rel)


def barrier_quermass_direct(body: BarrierBody | Cylinder, q: float,
                            grid: SphericalGrid) -> float:
    """Grid quadrature of the product body's min-form radial function."""
    return dual_quermass(body, q, grid)


@dataclass(frozen=True)
class BarrierIntegrals:
    """The four angular integrals of a barrier body's quermassintegral."""

    i1: float
    i2: float
    i3: float
    i4: float
    n: int
    k: int
    q: float
    params: np.ndarray

    def as_array(self) -> np.ndarray:
        return np.array([self.i1, self.i2, self.i3, self.i4])

    @property
    def combined(self) -> float:
        return self.i1 + self.i2 + self.i3 + self.i4


def _unit_gauss(resolution: int):
    x, w = leggauss(resolution)
    return 0.5 * (x + 1.0), 0.5 * w


def _barrier_constant(n: int, k: int) -> float:
    # |S^0| = 2 from the segment block, |S^{n-k-2}| from the ball block, 1/n
    # from the quermassintegral normalization.
    return 2.0 / n * (n - k - 1) * unit_ball_volume(n - k - 1)


def barrier_quermass_decomposed(body: BarrierBody, q: float, resolution: int = 64):
    """Quermassintegral via the four split-coordinate angular integrals.

    Returns (BarrierIntegrals, total).  The integrals run over the ellipsoid
    block sphere and nested (theta, phi) ranges split at the branch curves of
    the radial function; total must match `barrier_quermass_direct`.
    """
    n, k = body.dim, body.k
    a = body.params
    a_seg = float(a[k])
    u1_nodes, u1_w = subsphere_nodes(k, resolution)
    rho_bar = np.atleast_1d(body.ellipsoid_block_radial(u1_nodes))
    xs, ws = _unit_gauss(resolution)

    totals = np.zeros(4)
    for rb, w1 in zip(rho_bar, u1_w):
        theta_star = math.atan2(a_seg, rb)
        # low-theta strip: theta in [0, theta_star]
        t_lo = theta_star * xs
        wt_lo = theta_star * ws
        phi_split_lo = np.arctan2(np.cos(t_lo), rb)
        # I1: phi in [0, arctan(cos theta / rho_bar)]
        phi = phi_split_lo[:, None] * xs[None, :]
        wp = phi_split_lo[:, None] * ws[None, :]
        vals = (rb ** q * np.cos(t_lo)[:, None] ** (k - 1 - q)
                * np.cos(phi) ** (k - q) * np.sin(phi) ** (n - k - 2))
        totals[0] += w1 * float(wt_lo @ (wp * vals).sum(axis=1))
        # I2: phi in [arctan(cos theta / rho_bar), pi/2]
        span = math.pi / 2 - phi_split_lo
        phi = phi_split_lo[:, None] + span[:, None] * xs[None, :]
        wp = span[:, None] * ws[None, :]
        vals = (np.cos(t_lo)[:, None] ** (k - 1)
                * np.cos(phi) ** k * np.sin(phi) ** (n - k - q - 2))
        totals[1] += w1 * float(wt_lo @ (wp * vals).sum(axis=1))
        # high-theta strip: theta in [theta_star, pi/2]
        t_hi = theta_star + (math.pi / 2 - theta_star) * xs
        wt_hi = (math.pi / 2 - theta_star) * ws
        phi_split_hi = np.arctan2(np.sin(t_hi), a_seg)
        # I3: phi in [0, arctan(sin theta / a_seg)]
        phi = phi_split_hi[:, None] * xs[None, :]
        wp = phi_split_hi[:, None] * ws[None, :]
        vals = (a_seg ** q * np.cos(t_hi)[:, None] ** (k - 1)
                * np.sin(t_hi)[:, None] ** (-q)
                * np.cos(phi) ** (k - q) * np.sin(phi) ** (n - k - 2))
        totals[2] += w1 * float(wt_hi @ (wp * vals).sum(axis=1))
        # I4: phi in [arctan(sin theta / a_seg), pi/2]
        span = math.pi / 2 - phi_split_hi
        phi = phi_split_hi[:, None] + span[:, None] * xs[None, :]
        wp = span[:, None] * ws[None, :]
        vals = (np.cos(t_hi)[:, None] ** (k - 1)
                * np.cos(phi) ** k * np.sin(phi) ** (n - k - q - 2))
        totals[3] += w1 * float(wt_hi @ (wp * vals).sum(axis=1))

    integrals = BarrierIntegrals(*totals, n=n, k=k, q=float(q), params=a)
    return integrals, _barrier_constant(n, k) * integrals.combined


def barrier_quermass_transformed(body: BarrierBody, q: float, resolution: int = 64):
    """The same four integrals in rationalized (t, s) variables.

    Improper upper limits are mapped to (0, 1] by the substitution s -> 1/s;
    the resulting integrands stay bounded only for q < n, so q >= n is a
    domain error (the s-tail of the second integral would diverge).
    """
    n, k = body.dim, body.k
    if q >= n:
        raise DomainError(f"transformed integrals require q < n, got q = {q}")
    a = body.params
    a_seg = float(a[k])
    u1_nodes, u1_w = subsphere_nodes(k, resolution)
    rho_bar = np.atleast_1d(body.ellipsoid_block_radial(u1_nodes))
    xs, ws = _unit_gauss(resolution)

    rb = rho_bar[:, None, None]
    w1 = np.asarray(u1_w)
    t = xs[None, :, None]
    s = xs[None, None, :]
    wts = ws[None, :, None] * ws[None, None, :]
    power = 0.5 * (q - n)

    def accumulate(values) -> float:
        return float(w1 @ (values * wts).sum(axis=(1, 2)))

    # finite-box integrand of the first kind at (t, s)
    core1 = rb ** k * (rb ** 2 + (a_seg * t) ** 2 + s ** 2) ** power
    i1 = a_seg * accumulate(core1 * s ** (n - k - 2))
    # s-tail via s -> 1/s
    inv_s = 1.0 / s
    core2 = rb ** k * (rb ** 2 + (a_seg * t) ** 2 + inv_s ** 2) ** power
    i2 = a_seg * accumulate(core2 * inv_s ** (n - k - q - 2) * s ** -2)
    # t-tail via t -> 1/t
    inv_t = 1.0 / t
    core3 = rb ** k * (rb ** 2 + (a_seg * inv_t) ** 2 + (s * inv_t) ** 2) ** power
    i3 = a_seg * accumulate(core3 * inv_t ** (n - k - q - 1) * s ** (n - k - 2) * t ** -2)
    # both tails
    core4 = rb ** k * (rb ** 2 + (a_seg * inv_t) ** 2 + (inv_s * inv_t) ** 2) ** power
    i4 = a_seg * accumulate(core4 * inv_t ** (n - k - q - 1)
                            * inv_s ** (n - k - q - 2) * (s * t) ** -2)

    integrals = BarrierIntegrals(i1, i2, i3, i4, n=n, k=k, q=float(q), params=a)
    return integrals, _barrier_constant(n, k) * integrals.combined


def cylinder_quermass(body: Cylinder, q: float, resolution: int = 96) -> float:
    """Quermassintegral of an ellipsoid-cross-ball cylinder by 1-D quadrature.

    The radial min splits the polar angle into two smooth pieces; both are
    rationalized so the rule stays accurate for arbitrarily small ellipsoid
    parameters.
    """
    n, k = body.dim, body.k
    u1_nodes, u1_w = subsphere_nodes(k, resolution)
    rho_bar = np.atleast_1d(np.sum(np.atleast_2d(u1_nodes) ** 2 / body.params ** 2,
                                   axis=1) ** -0.5)
    xs, ws = _unit_gauss(resolution)
    power = 0.5 * (q - n)

    rb = rho_bar[:, None]
    s = xs[None, :]
    piece1 = rb ** k * s ** (n - k - 1) * (rb ** 2 + s ** 2) ** power
    sigma = rb * s  # second piece integrated over [0, rho_bar]
    piece2 = rb * (rb * s) ** (k - 1) * (1.0 + sigma ** 2) ** power
    per_u1 = (piece1 + piece2) @ ws
    area_ball_sphere = (n - k) * unit_ball_volume(n - k)
    return float(area_ball_sphere / n * (np.asarray(u1_w) @ per_u1))


def barrier_bound_ratio(family, q: float, resolution: int = 96) -> np.ndarray:
    """Quermassintegral-to-parameter-product ratios along a body family.

    For barrier bodies (valid for k < q < k+1) the denominator is
    a_1 ... a_k a_{k+1}^(q-k); for cylinders (valid for k < q <= n) it is
    a_1 ... a_k.  Consumers assert boundedness of the returned sequence.
    """
    ratios = []
    for member in family:
        if isinstance(member, BarrierBody):
            k = member.k
            if not (k < q < k + 1):
                raise DomainError(
                    f"barrier ratio regime is k < q < k+1 (k = {k}), got q = {q}")
            _, w = barrier_quermass_transformed(member, q, resolution)
            denom = float(np.prod(member.params[:k])) * member.params[k] ** (q - k)
        elif isinstance(member, Cylinder):
            k = member.k
            if not (k < q <= member.dim):
                raise DomainError(
                    f"cylinder ratio regime is k < q <= n (k = {k}), got q = {q}")
            w = cylinder_quermass(member, q, resolution)
            denom = float(np.prod(member.params))
        else:
            raise DomainError(f"unsupported family member type {type(member).__name__}")
        ratios.append(w / denom)
    return np.asarray(ratios)
