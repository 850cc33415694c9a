"""Discrete even measures on the sphere and their concentration machinery.

A discrete even measure is stored as antipodal atom pairs: one canonical
direction per pair (first nonzero coordinate positive) and the total mass of
{u, -u} combined.  Evenness then holds by construction, and the entropy
functional

    E_mu(f) = -(1/|mu|) integral of log f  d mu

collapses exactly onto the pair representatives for even f.

The module also provides the coordinate-slab partition of the sphere, the
exact subspace mass inequality decision for discrete measures, the prefix-sum
rearrangement bound, and the computable partition bound that dominates the
entropy of an ellipsoid.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import CapabilityError, DomainError
from .validation import (as_float_array, check_orthonormal_frame, check_positive,
                         check_unit_vectors)

SUBSPACE_TOL = 1e-9          # atom-in-subspace tolerance for the mass checker
MAX_EXACT_PAIRS = 24         # exact subset enumeration limit


def canonicalize_directions(directions: np.ndarray) -> np.ndarray:
    """Flip each direction so its first nonzero coordinate is positive."""
    dirs = np.array(directions, dtype=float)
    for row in dirs:
        nz = np.flatnonzero(np.abs(row) > 1e-12)
        if nz.size == 0:
            raise DomainError("zero direction in measure atoms")
        if row[nz[0]] < 0:
            row *= -1.0
    return dirs


@dataclass(frozen=True)
class DiscreteEvenMeasure:
    """Finite even Borel measure given by antipodal atom pairs.

    `weights[i]` is the total mass of the pair {u_i, -u_i}.  The constructor
    canonicalizes pair representatives and merges duplicate directions by
    summing their weights.
    """

    directions: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        dirs = check_unit_vectors(self.directions, "directions")
        w = check_positive(self.weights, "weights")
        if w.ndim != 1 or w.shape[0] != dirs.shape[0]:
            raise DomainError("weights must match the atom directions")
        dirs = canonicalize_directions(dirs)
        merged_dirs, merged_w = [], []
        for d, wi in zip(dirs, w):
            for j, e in enumerate(merged_dirs):
                if np.linalg.norm(d - e) <= 1e-12:
                    merged_w[j] += wi
                    break
            else:
                merged_dirs.append(d)
                merged_w.append(float(wi))
        dirs = np.asarray(merged_dirs)
        w = np.asarray(merged_w)
        dirs.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "directions", dirs)
        object.__setattr__(self, "weights", w)

    @property
    def dim(self) -> int:
        return self.directions.shape[1]

    @property
    def npairs(self) -> int:
        return self.directions.shape[0]

    @property
    def total(self) -> float:
        """Total mass |mu|."""
        return float(self.weights.sum())

    def transformed(self, rotation: np.ndarray) -> "DiscreteEvenMeasure":
        """Apply an orthogonal transform to every atom."""
        q = as_float_array(rotation, "rotation", ndim=2)
        return DiscreteEvenMeasure(self.directions @ q.T, self.weights)


def entropy(mu: DiscreteEvenMeasure, body_or_function) -> float:
    """Entropy functional -(1/|mu|) sum_i w_i log f(u_i).

    `body_or_function` is either a convex body (f is its support function) or
    a positive callable on directions.
    """
    if hasattr(body_or_function, "support_function"):
        values = np.asarray(body_or_function.support_function(mu.directions), dtype=float)
    elif callable(body_or_function):
        values = np.asarray([float(body_or_function(u)) for u in mu.directions])
    else:
        raise DomainError("expected a convex body or a positive function on directions")
    if np.any(values <= 0) or np.any(~np.isfinite(values)):
        i = int(np.argmin(values))
        raise DomainError(f"entropy integrand is not strictly positive at atom {i}")
    return -float(mu.weights @ np.log(values)) / mu.total


@dataclass(frozen=True)
class PartitionMasses:
    """Normalized atom masses of the coordinate-slab partition cells."""

    basis: np.ndarray
    delta: float
    masses: np.ndarray
    cells: np.ndarray  # cell index per atom pair

    @property
    def prefix(self) -> np.ndarray:
        return np.cumsum(self.masses)


def partition_masses(mu: DiscreteEvenMeasure, basis, delta: float) -> PartitionMasses:
    """Assign atoms to the slab cells and return normalized cell masses.

    The cell of v is the largest index i with |v.e_i| >= delta; all later
    coordinates are then below delta in magnitude.  For 0 < delta < 1/sqrt(n)
    the cells partition the sphere, so every atom is assigned exactly once.
    Boundary atoms (|v.e_i| equal to delta at float precision) count as >=.
    """
    n = mu.dim
    b = check_orthonormal_frame(basis, n, "basis")
    if not (0.0 < delta < 1.0 / math.sqrt(n)):
        raise DomainError(f"delta must lie in (0, 1/sqrt(n)) = (0, {1.0 / math.sqrt(n):.6g})")
    comps = np.abs(mu.directions @ b.T)
    mask = comps >= delta
    if np.any(~mask.any(axis=1)):
        raise DomainError("an atom matched no cell; delta is too close to 1/sqrt(n)")
    cells = n - 1 - np.argmax(mask[:, ::-1], axis=1)
    masses = np.bincount(cells, weights=mu.weights, minlength=n) / mu.total
    return PartitionMasses(b, float(delta), masses, cells)


@dataclass(frozen=True)
class SmiReport:
    """Outcome of the subspace mass inequality check."""

    passes: bool
    q: float
    margin: float
    witness_dim: int
    witness_basis: np.ndarray
    witness_ratio: float
    witness_bound: float
    witness_atoms: tuple


def smi_check(mu: DiscreteEvenMeasure, q: float) -> SmiReport:
    """Exact subspace mass inequality decision for a discrete even measure.

    Candidate subspaces are the spans of linearly independent atom subsets of
    dimension 1..n-1; this is exhaustive because any subspace can be shrunk to
    the span of the atoms it contains without decreasing the violation.  The
    measure passes iff mass(subspace)/|mu| < min(dim/q, 1) strictly for every
    candidate.  The witness minimizes bound - ratio; ties keep the first
    candidate in lexicographic subset order.
    """
    n = mu.dim
    if not (0.0 < q < n):
        raise DomainError(f"q must lie in (0, n) = (0, {n}), got {q}")
    p = mu.npairs
    if p > MAX_EXACT_PAIRS:
        raise CapabilityError(
            f"exact subspace enumeration supports at most {MAX_EXACT_PAIRS} atom pairs, got {p}"
        )
    dirs = mu.directions
    total = mu.total

    passes = True
    best = None
    for size in range(1, min(n - 1, p) + 1):
        for subset in combinations(range(p), size):
            block = dirs[list(subset)]
            u_svd, s, vt = np.linalg.svd(block, full_matrices=False)
            rank = int(np.sum(s > 1e-10 * s[0]))
            if rank < size:
                continue  # dependent subset; its span was already enumerated
            basis = vt[:size]
            resid = dirs - (dirs @ basis.T) @ basis
            inside = np.linalg.norm(resid, axis=1) <= SUBSPACE_TOL
            ratio = float(mu.weights[inside].sum()) / total
            bound = min(size / q, 1.0)
            margin = bound - ratio
            if ratio >= bound:
                passes = False
            if best is None or margin < best[0]:
                best = (margin, size, basis.copy(), ratio, bound, subset)
    margin, dim, basis, ratio, bound, subset = best
    return SmiReport(passes, float(q), margin, dim, basis, ratio, bound, subset)


def rearrangement_bound(lam, x, sigma) -> float:
    """Certified lower bound sum_i (sigma_i - sigma_{i-1}) x_i for sum_i lam_i x_i.

    Requires lam >= 0 summing to 1, x ascending, sigma_n = 1 and the prefix
    conditions lam_1 + ... + lam_i <= sigma_i for every i.
    """
    lam = as_float_array(lam, "lam", ndim=1)
    x = as_float_array(x, "x", ndim=1)
    sigma = as_float_array(sigma, "sigma", ndim=1)
    n = lam.shape[0]
    if x.shape != (n,) or sigma.shape != (n,):
        raise DomainError("lam, x, sigma must have equal lengths")
    if np.any(lam < 0):
        raise DomainError("lam must be nonnegative")
    if abs(lam.sum() - 1.0) > 1e-9:
        raise DomainError(f"lam must sum to 1, got {lam.sum():.12g}")
    if np.any(np.diff(x) < 0):
        raise DomainError("x must be ascending")
    if abs(sigma[-1] - 1.0) > 1e-12:
        raise DomainError(f"sigma[n] must equal 1, got {sigma[-1]:.12g}")
    prefix = np.cumsum(lam)
    bad = prefix > sigma + 1e-12
    if np.any(bad):
        i = int(np.argmax(bad))
        raise DomainError(
            f"prefix condition violated at index {i}: "
            f"lam_1+...+lam_{i + 1} = {prefix[i]:.12g} > sigma_{i + 1} = {sigma[i]:.12g}"
        )
    increments = np.diff(np.concatenate([[0.0], sigma]))
    return float(increments @ x)


def entropy_partition_bound(mu: DiscreteEvenMeasure, ellipsoid, delta0: float) -> float:
    """Computable upper bound -log(delta0/2) - sum_i lam_i log a_i >= E_mu(Q).

    The partition basis is the ellipsoid's own axis frame; on the i-th cell
    the support function satisfies h_Q(v) >= a_i |v.e_i| >= a_i delta0, and
    the extra factor 1/2 keeps the bound valid under small axis perturbations.
    """
    pm = partition_masses(mu, ellipsoid.axes, delta0)
    return -math.log(delta0 / 2.0) - float(pm.masses @ np.log(ellipsoid.semiaxes))


def ellipsoid_entropy_growth(q: float, semiaxes, t0: float) -> float:
    """Explicit divergence rate of the entropy bound along collapsing ellipsoids.

    For semiaxes a_1 <= ... <= a_n this returns the parameter-dependent part

        -(1/q) log(a_1 ... a_r) - ((q - r)/q) log a_{r+1} + t0 log a_1

    with r = floor(q) capped at n-1 (the last term drops when r = n-1).  The
    entropy of the ellipsoid exceeds this by at most an a-independent
    constant whenever the measure satisfies the subspace mass inequality with
    slack t0; the gap therefore stays bounded above as a_1 -> 0.
    """
    a = check_positive(semiaxes, "semiaxes")
    check_ascending(a, "semiaxes")
    n = a.shape[0]
    if not (1.0 < q < n):
        raise DomainError(f"q must lie in (1, n), got {q}")
    r = min(int(math.floor(q)), n - 1)
    value = -np.log(a[:r]).sum() / q + t0 * math.log(a[0])
    if r < n - 1:
        value -= (q - r) / q * math.log(a[r])
    return float(value)
