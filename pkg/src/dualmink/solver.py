"""Solve the even dual Minkowski problem for discrete measures.

Given an even measure mu with atom pairs at directions v_i and 0 < q < n, the
solver maximizes the degree-0 homogeneous objective

    phi(h) = -(1/|mu|) sum_i mu_i log h_i + (1/q) log W([h], q)

over positive support vectors h on a fixed normal set (the atom directions by
default, optionally augmented).  Here [h] is the halfspace intersection
{x : |x.v_i| <= h_i} and W its dual quermassintegral on a fixed grid.  The
gradient in log h is exactly the measure-matching residual,

    g_i = -mu_i/|mu| + C_i/W,

with C the grid dual curvature measure of [h]; both terms are probability
vectors, so the components sum to zero.  Critical points followed by the
rescaling c = (|mu|/W)^(1/q) solve C(cK, .) = mu on the grid.

The ascent is projected (the constant direction is removed), uses a spectral
initial step with Armijo backtracking, and renormalizes max h = 1 after every
accepted step.  The loop needs only radial evaluation, no vertex enumeration.
A measure that violates the subspace mass inequality is rejected up front
unless forced; forced runs typically end with the `diverging` status once the
iterates' inradius/diameter ratio collapses.

Grid curvature cells make the gradient field piecewise constant at the scale
of single node masses, so first-order ascent bottoms out at a residual floor
of order (node weight)/W.  Within one assignment of nodes to facet pairs the
matching equation solves in closed form, which yields an exact finishing
move: search the low-margin node-pair assignments for a self-consistent one
and jump to its closed-form solution.  When the finisher fires the reported
residual is at float precision; when the ascent stalls too far from the
fixed point the run ends honestly with status "max_iters".
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np
from sklearn.base import BaseEstimator

from .bodies import SymmetricPolytope, polytope_radial_argmin, polytope_radial_data
from .errors import DomainError, GeometryError, SubspaceMassViolation
from .functionals import polytope_curvature_data
from .measures import DiscreteEvenMeasure, canonicalize_directions, smi_check
from .sphere import MONTE_CARLO, PRODUCT_ANGLE, SphericalGrid, build_grid
from .validation import check_unit_vectors

# Polytope radial functions are only piecewise smooth, so polytope grids
# default to 4x the smooth-body resolution.
SMOOTH_RESOLUTION = {2: 64, 3: 32, 4: 16}
DIVERGENCE_RATIO = 1e-6


def default_grid(n: int, resolution: int | None = None, scheme: str | None = None,
                 seed: int | None = None) -> SphericalGrid:
    """Default solver grid: product-angle at 4x smooth resolution for n <= 4."""
    if scheme is None:
        scheme = PRODUCT_ANGLE if n <= 4 else MONTE_CARLO
    if resolution is None:
        resolution = 4 * SMOOTH_RESOLUTION[n] if scheme == PRODUCT_ANGLE else 400_000
    return build_grid(n, resolution, scheme, seed)


@dataclass(frozen=True)
class SolveConfig:
    """Solver parameters; `normals` replaces the default atom-direction set."""

    q: float
    normals: np.ndarray | None = None
    augment: np.ndarray | None = None
    grid: SphericalGrid | None = None
    grid_resolution: int | None = None
    grid_scheme: str | None = None
    grid_seed: int | None = None
    tol: float = 1e-6
    max_iters: int = 5000
    step0: float = 1.0
    backtrack: float = 0.5
    sufficient_increase: float = 1e-4
    force: bool = False
    restarts: int = 0
    restart_scale: float = 0.03
    restart_seed: int = 0


@dataclass
class SolveResult:
    """Rescaled solution body together with the run diagnostics."""

    body: SymmetricPolytope
    c: float
    normals: np.ndarray
    measure_weights: np.ndarray
    curvature_values: np.ndarray
    residual: float
    status: str
    iterations: int
    phi_trace: np.ndarray
    gradient_norm: float
    q: float
    grid: SphericalGrid

    @property
    def converged(self) -> bool:
        return self.status == "converged"


def _resolve_normals(mu: DiscreteEvenMeasure, config: SolveConfig):
    """Normal set (atoms first) and the per-normal measure weights."""
    atoms = mu.directions
    if config.normals is not None:
        normals = canonicalize_directions(check_unit_vectors(config.normals, "normals"))
    else:
        normals = atoms.copy()
    extra = []
    if config.augment is not None:
        aug = canonicalize_directions(check_unit_vectors(config.augment, "augment"))
        extra = [v for v in aug
                 if np.min(np.linalg.norm(normals - v, axis=1)) > 1e-12]
        if extra:
            normals = np.vstack([normals] + [np.asarray(extra)])
    weights = np.zeros(normals.shape[0])
    for d, w in zip(atoms, mu.weights):
        dist = np.linalg.norm(normals - d, axis=1)
        j = int(np.argmin(dist))
        if dist[j] > 1e-12:
            raise DomainError("normal set must contain every atom direction of the measure")
        weights[j] += w
    if np.linalg.matrix_rank(normals, tol=1e-10) < mu.dim:
        raise GeometryError("normal set does not span R^n; augment it before solving")
    return normals, weights


def phi(mu: DiscreteEvenMeasure, h, q: float, grid: SphericalGrid,
        normals: np.ndarray | None = None) -> float:
    """Objective value at the support vector h over the normal set."""
    normals, weights, h = _phi_inputs(mu, h, normals)
    return _phi_value(normals, weights, mu.total, h, q, grid)


def phi_gradient(mu: DiscreteEvenMeasure, h, q: float, grid: SphericalGrid,
                 normals: np.ndarray | None = None) -> np.ndarray:
    """Gradient of the objective with respect to log h; sums to zero."""
    normals, weights, h = _phi_inputs(mu, h, normals)
    w_total, curv = polytope_curvature_data(normals, h, q, grid)
    return -weights / mu.total + curv / w_total


def _phi_inputs(mu, h, normals):
    cfg = SolveConfig(q=1.0, normals=normals)
    normals, weights = _resolve_normals(mu, cfg)
    h = np.asarray(h, dtype=float)
    if h.shape != (normals.shape[0],):
        raise DomainError(f"h must assign one support number per normal pair "
                          f"({normals.shape[0]}), got {h.shape}")
    if np.any(h <= 0):
        raise GeometryError("support numbers must stay strictly positive")
    return normals, weights, h


def _phi_value(normals, weights, total, h, q, grid) -> float:
    if np.any(h <= 0) or h.min() / h.max() < 1e-14:
        raise GeometryError("Wulff body degenerated: support ratio below tolerance")
    rho = polytope_radial_data(normals, h, grid.nodes)
    w = float(grid.weights @ rho ** float(q)) / grid.dim
    if not np.isfinite(w) or w <= 0:
        raise GeometryError("quermassintegral evaluation degenerated")
    entropy_term = -float(weights @ np.log(h)) / total
    return entropy_term + np.log(w) / q


def maximize(mu: DiscreteEvenMeasure, config: SolveConfig) -> SolveResult:
    """Run the projected gradient ascent and rescale the maximizer.

    Raises SubspaceMassViolation when the measure fails the mass-inequality
    gate and `config.force` is not set.  Status is one of "converged"
    (gradient norm at tolerance), "diverging" (inradius/diameter collapse),
    or "max_iters".  When the ascent bottoms out above tolerance, the
    closed-form assignment finisher is attempted, optionally from a few
    seeded restart perturbations.
    """
    n = mu.dim
    q = float(config.q)
    if not (0.0 < q <= n):
        raise DomainError(f"q must lie in (0, n] with n = {n}, got {q}")
    if config.tol <= 0:
        raise DomainError("tolerance must be positive")
    if not config.force:
        # q = n is handled as a limit case: the strict mass inequality is
        # checked just inside the open interval so equality-case measures
        # (cone-volume data) pass the gate.
        report = smi_check(mu, min(q, n * (1 - 1e-12)))
        if not report.passes:
            raise SubspaceMassViolation(report)

    normals, weights = _resolve_normals(mu, config)
    grid = config.grid if config.grid is not None else default_grid(
        n, config.grid_resolution, config.grid_scheme, config.grid_seed)
    if grid.dim != n:
        raise DomainError("grid dimension does not match the measure")

    total = mu.total
    mu_frac = weights / total
    trace = []
    x, status, gnorm, shape_ratio, iterations = _ascend(
        normals, weights, mu_frac, total, q, grid, config,
        np.zeros(normals.shape[0]), trace)

    if status == "max_iters" and gnorm > config.tol and shape_ratio >= DIVERGENCE_RATIO:
        y = _basin_finish(normals, mu_frac, q, grid, x)
        rng = np.random.default_rng(config.restart_seed)
        attempt = 0
        while y is None and attempt < config.restarts:
            attempt += 1
            bump = rng.normal(scale=config.restart_scale, size=x.shape)
            x2, st2, gn2, sr2, it2 = _ascend(
                normals, weights, mu_frac, total, q, grid, config,
                x + bump - (x + bump).max(), [])
            iterations += it2
            if st2 == "converged":
                x, status, gnorm = x2, st2, gn2
                break
            if sr2 >= DIVERGENCE_RATIO:
                y = _basin_finish(normals, mu_frac, q, grid, x2)
                if y is None and gn2 < gnorm:
                    x, gnorm = x2, gn2
        if y is not None:
            x = y - y.max()
            status = "converged"
            _, grad_fin, _ = _gradient_at(normals, mu_frac, q, grid, x)
            gnorm = float(np.max(np.abs(grad_fin)))

    h = np.exp(x)
    w_total, curv = polytope_curvature_data(normals, h, q, grid)
    c = (total / w_total) ** (1.0 / q)
    body = SymmetricPolytope(normals, c * h)
    scaled_curv = c ** q * curv
    residual = float(np.max(np.abs(scaled_curv - weights))) / total
    if status == "converged" and residual > config.tol:
        status = "max_iters"
    return SolveResult(
        body=body, c=float(c), normals=normals, measure_weights=weights,
        curvature_values=scaled_curv, residual=residual, status=status,
        iterations=iterations, phi_trace=np.asarray(trace),
        gradient_norm=gnorm, q=q, grid=grid,
    )


def _gradient_at(normals, mu_frac, q, grid, x):
    h = np.exp(x)
    rho, idx = polytope_radial_argmin(normals, h, grid.nodes)
    contrib = grid.weights * rho ** q / grid.dim
    curv = np.bincount(idx, weights=contrib, minlength=normals.shape[0])
    w_total = float(contrib.sum())
    grad = curv / w_total - mu_frac
    return w_total, grad - grad.mean(), float(rho.min()) / (2.0 * float(rho.max()))


def _ascend(normals, weights, mu_frac, total, q, grid, config, x0, trace):
    """Projected spectral-step gradient ascent with Armijo backtracking."""
    n = grid.dim
    x = x0

    def evaluate(xv):
        h = np.exp(xv)
        if h.min() / h.max() < 1e-14:
            raise GeometryError("Wulff body degenerated: support ratio below tolerance")
        rho, idx = polytope_radial_argmin(normals, h, grid.nodes)
        contrib = grid.weights * rho ** q / n
        curv = np.bincount(idx, weights=contrib, minlength=normals.shape[0])
        w_total = float(contrib.sum())
        if not np.isfinite(w_total) or w_total <= 0:
            raise GeometryError("quermassintegral evaluation degenerated")
        value = -float(weights @ xv) / total + np.log(w_total) / q
        grad = curv / w_total - mu_frac
        return value, grad - grad.mean(), float(rho.min()) / (2.0 * float(rho.max()))

    value, grad, shape_ratio = evaluate(x)
    trace.append(value)
    gnorm = float(np.max(np.abs(grad)))
    status = "max_iters"
    step = float(config.step0)
    prev_x = prev_g = None
    iterations = 0
    for iterations in range(1, config.max_iters + 1):
        if gnorm <= config.tol:
            status = "converged"
            break
        if shape_ratio < DIVERGENCE_RATIO:
            status = "diverging"
            break
        if prev_x is not None:
            s = x - prev_x
            y = grad - prev_g
            curvature = float(s @ y)
            if curvature < 0:
                step = float(np.clip(s @ s / -curvature, 1e-10, 1e4))
            else:
                step = min(step * 2.0, 1e4)
        prev_x, prev_g = x, grad
        gsq = float(grad @ grad)
        accepted = False
        t = step
        for _ in range(60):
            x_new = x + t * grad
            x_new = x_new - x_new.max()  # renormalize max h = 1
            if np.array_equal(x_new, x):
                break  # step shrank below float resolution
            try:
                value_new, grad_new, shape_ratio = evaluate(x_new)
            except GeometryError:
                t *= config.backtrack
                continue
            if value_new >= value + config.sufficient_increase * t * gsq:
                accepted = True
                break
            t *= config.backtrack
        if not accepted:
            break  # first-order progress exhausted at the assignment-kink scale
        x, value, grad = x_new, value_new, grad_new
        step = t
        trace.append(value)
        gnorm = float(np.max(np.abs(grad)))
    return x, status, gnorm, shape_ratio, iterations


def _basin_finish(normals, mu_frac, q, grid, x_center, max_pairs=(14, 20),
                  max_depth=(5, 6), orbit=64):
    """Search low-margin node-pair assignments for a self-consistent one.

    Within a fixed assignment of grid nodes to facet pairs the matching
    equation has the closed-form solution x_i = (log mu_i - log B_i)/q; an
    assignment that reproduces itself at its own solution is an exact zero of
    the residual.  Candidate assignments differ from the current one on the
    antipodal node pairs with the smallest argmin margins (flips happen in
    antipodal pairs because mirrored nodes carry identical keys).  Returns
    the solved log-support vector or None.
    """
    N = grid.size
    m = normals.shape[0]
    n = grid.dim
    dots = np.abs(grid.nodes @ normals.T)
    rows = np.arange(N)
    wq = grid.weights / n
    with np.errstate(divide="ignore"):
        logd = np.log(dots)
    dpow = np.where(dots > 0, dots ** (-float(q)), 0.0)
    half = N // 2
    log_mu = np.where(mu_frac > 0, np.log(np.where(mu_frac > 0, mu_frac, 1.0)), -np.inf)
    if np.any(mu_frac <= 0):
        return None

    def search(max_float, depth_cap):
        keys = x_center[None, :] - logd
        order = np.argsort(keys, axis=1)
        margin = keys[rows, order[:, 1]] - keys[rows, order[:, 0]]
        floats = np.argsort(margin[:half])[:max_float]
        float_nodes = np.concatenate([floats, floats + half])
        mask = np.ones(N, bool)
        mask[float_nodes] = False
        base = order[:, 0]
        locked = np.bincount(base[mask], weights=(wq * dpow[rows, base])[mask],
                             minlength=m)
        kp = len(floats)
        top2 = order[floats][:, :2]
        term = (wq[floats] + wq[floats + half])[:, None] * \
            np.take_along_axis(dpow[floats, :], top2, axis=1)
        logd_top = np.take_along_axis(logd[floats, :], top2, axis=1)
        ar = np.arange(kp)

        def attempt(bits):
            b = locked + np.bincount(top2[ar, bits], weights=term[ar, bits],
                                     minlength=m)
            if np.any(b <= 0):
                return None, None
            y = (log_mu - np.log(b)) / q
            kk = y[top2] - logd_top
            induced = (kk[:, 1] < kk[:, 0]).astype(np.int8)
            if not np.array_equal(induced, bits):
                return None, induced
            yy = y - y.mean()
            idx_full = (yy[None, :] - logd).argmin(axis=1)
            b_full = np.bincount(idx_full, weights=wq * dpow[rows, idx_full],
                                 minlength=m)
            if np.any(b_full <= 0):
                return None, induced
            y2 = (log_mu - np.log(b_full)) / q
            y2 -= y2.mean()
            if np.array_equal((y2[None, :] - logd).argmin(axis=1), idx_full):
                return y2, induced
            return None, induced

        bits = np.zeros(kp, np.int8)
        seen = set()
        for _ in range(orbit):
            tb = bits.tobytes()
            if tb in seen:
                break
            seen.add(tb)
            solved, induced = attempt(bits)
            if solved is not None:
                return solved
            if induced is None:
                break
            bits = induced
        for depth in range(depth_cap + 1):
            for subset in combinations(range(kp), depth):
                bits = np.zeros(kp, np.int8)
                bits[list(subset)] = 1
                solved, _ = attempt(bits)
                if solved is not None:
                    return solved
        return None

    for mp, md in zip(max_pairs, max_depth):
        solved = search(mp, md)
        if solved is not None:
            return solved
    return None


@dataclass
class VerificationReport:
    """Fine-grid recomputation of the curvature measure of a solution."""

    pair_abs_error: np.ndarray
    pair_rel_error: np.ndarray
    max_rel_error: float
    total_gap: float
    grid_resolution: int


def verify_solution(result: SolveResult, mu: DiscreteEvenMeasure, q: float,
                    grid: SphericalGrid | None = None) -> VerificationReport:
    """Recompute the curvature measure of the solved body on a finer grid.

    Defaults to doubling the solve grid's resolution (same scheme and seed)
    and reports per-pair absolute/relative errors against the target measure
    plus the total-measure gap |W - |mu||.
    """
    if grid is None:
        base = result.grid
        grid = build_grid(base.dim, 2 * base.resolution, base.scheme, base.seed)
    w_total, curv = polytope_curvature_data(result.body.normals, result.body.support,
                                            q, grid)
    target = result.measure_weights
    abs_err = np.abs(curv - target)
    with np.errstate(divide="ignore", invalid="ignore"):
        rel_err = np.where(target > 0, abs_err / np.where(target > 0, target, 1.0),
                           abs_err / mu.total)
    return VerificationReport(
        pair_abs_error=abs_err,
        pair_rel_error=rel_err,
        max_rel_error=float(rel_err.max()),
        total_gap=abs(w_total - mu.total),
        grid_resolution=grid.resolution,
    )


class DualMinkowskiSolver(BaseEstimator):
    """Estimator facade over `maximize` with scikit-learn parameter semantics.

    Parameters mirror SolveConfig; `fit(mu)` stores the solved body and run
    diagnostics as trailing-underscore attributes and returns self.
    """

    def __init__(self, q=2.0, normals=None, augment=None, grid=None,
                 grid_resolution=None, grid_scheme=None, grid_seed=None,
                 tol=1e-6, max_iters=5000, step0=1.0, backtrack=0.5,
                 sufficient_increase=1e-4, force=False, restarts=0,
                 restart_scale=0.03, restart_seed=0):
        self.q = q
        self.normals = normals
        self.augment = augment
        self.grid = grid
        self.grid_resolution = grid_resolution
        self.grid_scheme = grid_scheme
        self.grid_seed = grid_seed
        self.tol = tol
        self.max_iters = max_iters
        self.step0 = step0
        self.backtrack = backtrack
        self.sufficient_increase = sufficient_increase
        self.force = force
        self.restarts = restarts
        self.restart_scale = restart_scale
        self.restart_seed = restart_seed

    def _config(self) -> SolveConfig:
        return SolveConfig(
            q=self.q, normals=self.normals, augment=self.augment, grid=self.grid,
            grid_resolution=self.grid_resolution, grid_scheme=self.grid_scheme,
            grid_seed=self.grid_seed, tol=self.tol, max_iters=self.max_iters,
            step0=self.step0, backtrack=self.backtrack,
            sufficient_increase=self.sufficient_increase, force=self.force,
            restarts=self.restarts, restart_scale=self.restart_scale,
            restart_seed=self.restart_seed,
        )

    def fit(self, mu: DiscreteEvenMeasure, y=None):
        result = maximize(mu, self._config())
        self.result_ = result
        self.body_ = result.body
        self.scale_ = result.c
        self.residual_ = result.residual
        self.status_ = result.status
        self.phi_trace_ = result.phi_trace
        self.n_iter_ = result.iterations
        return self

    def predict(self, directions):
        """Radial function of the fitted body at the given directions."""
        if not hasattr(self, "body_"):
            raise DomainError("solver is not fitted yet; call fit(mu) first")
        return self.body_.radial(np.asarray(directions, dtype=float))
