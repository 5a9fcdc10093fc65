"""Jacobi polynomials of type BC and their evaluation paths.

Three independent routes to the same values:

* exact expansion over orbit sums, obtained by orthogonalizing the orbit
  sum basis against the quadrature inner product (all ranks, all d, real p);
* the classical one-variable three-term recurrence in rank one;
* Monte Carlo averaging of the matrix-ball integral representation
  (d in {1, 2}).
"""
from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import kernels
from .errors import (
    GridUnderResolved,
    NonIntegerP,
    NotConverged,
    NotInChamber,
    NumericBreakdown,
    RankNotOne,
    SingularMinor,
    UnsupportedAlgebra,
)
from .quadrature import (
    MultiplicityTriple,
    QuadratureGrid,
    bc_weight_density,
    min_nodes,
)
from .weights import Weight, _orbit_array, as_vector, weights_below

__all__ = [
    "ModelParams",
    "JacobiExpansion",
    "BallMatrix",
    "MonteCarloEstimate",
    "jacobi_expand",
    "jacobi_eval",
    "jacobi_eval_points",
    "jacobi_eval_rank_one",
    "sample_haar_unitary",
    "sample_mp",
    "power_function",
    "jacobi_eval_mc",
    "moment_m",
    "moment_m_rank_one",
]


@dataclass(frozen=True)
class ModelParams:
    """Model parameters (d, p, q) with the derived multiplicities.

    d is the real dimension of the coefficient algebra (1, 2 or 4), p the
    large matrix size (real, >= q), q the rank.
    """

    d: int
    p: float
    q: int

    def __post_init__(self):
        if self.d not in (1, 2, 4):
            raise UnsupportedAlgebra(f"d must be 1, 2 or 4, got {self.d}")
        if self.q < 1:
            raise ValueError(f"rank q must be >= 1, got {self.q}")
        if self.p < self.q:
            raise ValueError(f"p must be >= q, got p={self.p}, q={self.q}")

    @property
    def k(self) -> MultiplicityTriple:
        return MultiplicityTriple.from_model(self.d, self.p, self.q)

    @property
    def rho(self) -> np.ndarray:
        i = np.arange(1, self.q + 1)
        return (self.d / 2.0) * (self.p + self.q + 2 - 2 * i) - 1.0

    @property
    def gamma(self) -> float:
        return self.d * (self.q - 0.5) + 1.0

    @property
    def alpha(self) -> float:
        self._require_rank_one()
        return (self.d * self.p - 2.0) / 2.0

    @property
    def beta(self) -> float:
        self._require_rank_one()
        return (self.d - 2.0) / 2.0

    @property
    def p_is_integer(self) -> bool:
        return float(self.p).is_integer()

    @property
    def in_main_range(self) -> bool:
        """p integer in {q, ..., 2q-1} or real above 2q-1."""
        if self.p > 2 * self.q - 1:
            return True
        return self.p_is_integer and self.p >= self.q

    def _require_rank_one(self):
        if self.q != 1:
            raise RankNotOne(f"rank-one parameter requested with q={self.q}")

    def key(self) -> tuple:
        return (self.d, float(self.p), self.q)


@dataclass(frozen=True)
class JacobiExpansion:
    """A polynomial as coefficients over orbit sums supported below its label."""

    lam: Weight
    coeffs: dict[Weight, float]
    params: ModelParams
    grid_nodes: int
    tolerance: float = 1e-8

    def to_json_dict(self) -> dict:
        return {
            "lambda": self.lam.to_text(),
            "params": {"d": self.params.d, "p": self.params.p, "q": self.params.q},
            "coeffs": [{"mu": mu.to_text(), "c": c} for mu, c in self.coeffs.items()],
            "grid_nodes": self.grid_nodes,
            "tolerance": self.tolerance,
        }


@dataclass(frozen=True)
class BallMatrix:
    """A matrix strictly inside the operator-norm unit ball."""

    entries: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.entries)
        gram = np.eye(w.shape[-1]) - w.conj().T @ w
        if np.linalg.eigvalsh(gram).min() <= 0:
            raise NotInChamber("matrix is not strictly inside the unit ball")


@dataclass(frozen=True)
class MonteCarloEstimate:
    """Mean and standard error of an MC average, with the imaginary-part diagnostic."""

    estimate: float
    stderr: float
    imag_mean: float = 0.0
    imag_stderr: float = 0.0
    n_samples: int = 0

    def __iter__(self):
        return iter((self.estimate, self.stderr))

    def to_dict(self) -> dict:
        return {
            "estimate": self.estimate,
            "stderr": self.stderr,
            "imag_mean": self.imag_mean,
            "imag_stderr": self.imag_stderr,
            "n_samples": self.n_samples,
        }


# --------------------------------------------------------------------------
# Orbit-sum expansion workspace


def _exact_available(k: MultiplicityTriple, q: int) -> bool:
    from ._exact_gram import exact_gram_available

    return exact_gram_available(2 * k.k1, 2 * k.k2, 2 * k.k3, q)


def _pack_orbits(weights: list[Weight]):
    arrays = [_orbit_array(w.parts) for w in weights]
    offsets = np.zeros(len(arrays) + 1, dtype=np.int64)
    np.cumsum([len(a) for a in arrays], out=offsets[1:])
    vectors = np.ascontiguousarray(np.vstack(arrays))
    return vectors, offsets


def _cholesky_lower(gram: np.ndarray) -> np.ndarray:
    """Dtype-generic Cholesky (numpy.linalg only supports float32/64)."""
    n = gram.shape[0]
    lower = np.zeros_like(gram)
    for j in range(n):
        pivot = gram[j, j] - (lower[j, :j] ** 2).sum()
        if pivot <= 0:
            raise NumericBreakdown(f"Gram matrix not positive definite at row {j}")
        lower[j, j] = np.sqrt(pivot)
        if j + 1 < n:
            lower[j + 1:, j] = (gram[j + 1:, j] - lower[j + 1:, :j] @ lower[j, :j]) / lower[j, j]
    return lower


def _invert_lower(lower: np.ndarray) -> np.ndarray:
    n = lower.shape[0]
    inv = np.zeros_like(lower)
    for i in range(n):
        if i:
            inv[i, :i] = -(lower[i, :i] @ inv[:i, :i]) / lower[i, i]
        inv[i, i] = 1.0 / lower[i, i]
    return inv


class ExpansionBasis:
    """All expansions up to a degree cap for one (params, grid) pair.

    Orthogonalization is done in one shot: with G the Gram matrix of the
    orbit sums in the graded basis order, the rows of inv(chol(G)) are the
    orthonormal polynomials, and rescaling each row to unit coefficient sum
    enforces value 1 at the origin.  The working precision escalates with
    the conditioning of G: float64, then extended-precision accumulation
    and factorization, then an exact rational Gram matrix factorized in
    arbitrary precision (available when the weight exponents are integers).
    """

    def __init__(self, params: ModelParams, grid: QuadratureGrid, cap: int):
        if grid.q != params.q:
            raise ValueError("grid rank does not match model rank")
        if grid.nodes_per_axis < min_nodes(cap):
            raise GridUnderResolved(
                f"{grid.nodes_per_axis} nodes per axis cannot support degree {cap}"
            )
        from .weights import enumerate_weights

        self.params = params
        self.grid = grid
        self.cap = cap
        self.weights = enumerate_weights(params.q, cap)
        self.index = {w.parts: i for i, w in enumerate(self.weights)}
        self.vectors, self.offsets = _pack_orbits(self.weights)
        n = len(self.weights)
        npts = grid.points.shape[0]

        dens = bc_weight_density(grid.points, params.k) * grid.weights
        gram = np.zeros((n, n))
        chunk = max(1, 4_000_000 // max(n, 1))
        for start in range(0, npts, chunk):
            pts = np.ascontiguousarray(grid.points[start:start + chunk])
            evals = kernels.orbit_sums(self.vectors, self.offsets, pts)
            gram += (evals * dens[start:start + chunk]) @ evals.T
        gram = 0.5 * (gram + gram.T)
        self.gram = gram
        self.mass = gram[0, 0]

        cond = self._estimate_cond(gram)
        self.cond_estimate = cond
        k = params.k
        exact_ok = _exact_available(k, params.q) and n <= 220
        ld_ok = n * n * npts <= 6e8

        self._pair_cache: dict[tuple, tuple] = {}
        if cond < 1e7:
            orth = np.tril(np.linalg.inv(np.linalg.cholesky(gram)))
            rowsum = orth.sum(axis=1)
        elif exact_ok and (cond >= 1e12 or not ld_ok):
            self._build_exact(cond)
            return
        elif ld_ok:
            gram_ld = np.zeros((n, n), dtype=np.longdouble)
            dens_ld = dens.astype(np.longdouble)
            for start in range(0, npts, chunk):
                pts = np.ascontiguousarray(grid.points[start:start + chunk])
                evals = kernels.orbit_sums(self.vectors, self.offsets, pts)
                evals_ld = evals.astype(np.longdouble)
                gram_ld += (evals_ld * dens_ld[start:start + chunk]) @ evals_ld.T
            gram_ld = 0.5 * (gram_ld + gram_ld.T)
            orth = np.tril(_invert_lower(_cholesky_lower(gram_ld)))
            rowsum = orth.sum(axis=1)
            gram = gram_ld
        else:
            raise NumericBreakdown(
                f"Gram matrix condition {cond:.2e} at size {n} exceeds every "
                "available precision tier"
            )

        if np.any(rowsum <= 0):
            raise NumericBreakdown("orthogonalization produced a non-positive value at 0")
        coeff_hp = orth / rowsum[:, None]
        self.coeff_rows = np.asarray(coeff_hp, dtype=np.float64)
        self.coeff_rows_hp = coeff_hp
        self.rowsum = rowsum
        self.norms = 1.0 / rowsum**2
        # <orbit sum_a, polynomial_tau> table used by product linearization;
        # kept in the factorization precision because its columns shrink with
        # the polynomial norms.
        self.cross = gram @ coeff_hp.T

    def _build_exact(self, cond: float):
        from ._exact_gram import exact_orthonormal_rows

        k = self.params.k
        dps = min(30 + int(np.log10(max(cond, 1.0))), 80)
        orbit_arrays = [_orbit_array(w.parts) for w in self.weights]
        parts = exact_orthonormal_rows(
            self.weights,
            orbit_arrays,
            round(2 * k.k1),
            round(2 * k.k2),
            round(2 * k.k3),
            self.params.q,
            dps=dps,
        )
        self.coeff_rows = parts["coeff_rows"]
        self.coeff_rows_hp = parts["coeff_rows_hp"]
        self.rowsum = parts["rowsum"]
        self.norms = 1.0 / parts["rowsum"] ** 2
        self.cross = parts["cross"]
        self.gram = parts["gram64"]
        self.mass = self.gram[0, 0]

    def pair_product(self, a: Weight, b: Weight):
        """Expansion of (orbit sum a) * (orbit sum b) over basis orbit sums.

        Exact combinatorics: orbit vectors add pairwise and are grouped by
        dominant representative.  Returns (basis indices, rational values).
        """
        key = (a.parts, b.parts) if a.parts >= b.parts else (b.parts, a.parts)
        hit = self._pair_cache.get(key)
        if hit is not None:
            return hit
        va = _orbit_array(a.parts).astype(np.int64)
        vb = _orbit_array(b.parts).astype(np.int64)
        sums = (va[:, None, :] + vb[None, :, :]).reshape(-1, a.rank)
        reps = -np.sort(-np.abs(sums), axis=1)
        uniq, counts = np.unique(reps, axis=0, return_counts=True)
        idx = np.array(
            [self.index[tuple(int(e) for e in r)] for r in uniq], dtype=np.int64
        )
        vals = counts.astype(np.float64) / (va.shape[0] * vb.shape[0])
        entry = (idx, vals)
        self._pair_cache[key] = entry
        return entry

    @staticmethod
    def _estimate_cond(gram: np.ndarray) -> float:
        if gram.shape[0] <= 1200:
            return float(np.linalg.cond(gram))
        try:
            diag = np.diag(np.linalg.cholesky(gram))
            return float((diag.max() / diag.min()) ** 2)
        except np.linalg.LinAlgError:
            return np.inf

    def expansion(self, lam: Weight) -> JacobiExpansion:
        i = self.index[lam.parts]
        below = weights_below(lam)
        idx = [self.index[mu.parts] for mu in below]
        row = self.coeff_rows[i, idx]
        row = row / row.sum()
        coeffs = {mu: float(c) for mu, c in zip(below, row)}
        return JacobiExpansion(lam, coeffs, self.params, self.grid.nodes_per_axis)

    def coefficient_vector(self, lam: Weight) -> np.ndarray:
        """Full coefficient row in basis order (entries off the dominance
        ideal are rounding noise)."""
        return self.coeff_rows[self.index[lam.parts]]

    def moment(self, lam: Weight) -> float:
        expn = self.expansion(lam)
        return moment_m(expn)


_BASIS_REGISTRY: dict[tuple, ExpansionBasis] = {}
_BASIS_LOCK = threading.RLock()


def get_basis(params: ModelParams, grid: QuadratureGrid, min_cap: int) -> ExpansionBasis:
    """Shared expansion workspace; grows its degree cap on demand."""
    key = (params.key(), grid.key())
    with _BASIS_LOCK:
        basis = _BASIS_REGISTRY.get(key)
        if basis is None or basis.cap < min_cap:
            cap = ((max(min_cap, 8) + 7) // 8) * 8
            cap = min(cap, grid.nodes_per_axis - 24)
            if cap < min_cap:
                raise GridUnderResolved(
                    f"grid with {grid.nodes_per_axis} nodes per axis cannot reach degree {min_cap}"
                )
            basis = ExpansionBasis(params, grid, cap)
            _BASIS_REGISTRY[key] = basis
        return basis


def clear_basis_registry():
    with _BASIS_LOCK:
        _BASIS_REGISTRY.clear()


def jacobi_expand(lam: Weight, params: ModelParams, grid: QuadratureGrid) -> JacobiExpansion:
    """Expand the polynomial with the given label over orbit sums.

    Normalized to value 1 at the origin, i.e. unit coefficient sum.
    """
    if lam.rank != params.q:
        from .errors import RankMismatch

        raise RankMismatch(f"weight rank {lam.rank} vs model rank {params.q}")
    if grid.nodes_per_axis < min_nodes(lam.first):
        raise GridUnderResolved(
            f"{grid.nodes_per_axis} nodes per axis insufficient for degree {lam.first}"
        )
    return get_basis(params, grid, lam.first).expansion(lam)


def jacobi_eval(expansion: JacobiExpansion, x) -> float:
    """Evaluate an expansion at one point (sum of weighted orbit sums)."""
    from .weights import orbit_sum_eval

    vec = as_vector(x, expansion.params.q)
    return float(sum(c * orbit_sum_eval(mu, vec) for mu, c in expansion.coeffs.items()))


def jacobi_eval_points(expansion: JacobiExpansion, points: np.ndarray) -> np.ndarray:
    """Vectorized evaluation on an (n, q) array of points."""
    support = list(expansion.coeffs)
    vectors, offsets = _pack_orbits(support)
    pts = np.ascontiguousarray(np.atleast_2d(np.asarray(points, dtype=np.float64)))
    evals = kernels.orbit_sums(vectors, offsets, pts)
    c = np.array([expansion.coeffs[mu] for mu in support])
    return c @ evals


# --------------------------------------------------------------------------
# Rank one: classical three-term recurrence


def _classical_jacobi(n: int, alpha: float, beta: float, u: float) -> float:
    """Unnormalized classical Jacobi polynomial P_n at u."""
    if n == 0:
        return 1.0
    p_prev = 1.0
    p_cur = (alpha + 1.0) + (alpha + beta + 2.0) * (u - 1.0) / 2.0
    for m in range(2, n + 1):
        ab = 2.0 * m + alpha + beta
        c1 = 2.0 * m * (m + alpha + beta) * (ab - 2.0)
        c2 = (ab - 1.0) * (alpha * alpha - beta * beta)
        c3 = (ab - 2.0) * (ab - 1.0) * ab
        c4 = 2.0 * (m + alpha - 1.0) * (m + beta - 1.0) * ab
        p_next = ((c2 + c3 * u) * p_cur - c4 * p_prev) / c1
        p_prev, p_cur = p_cur, p_next
    return p_cur


def _classical_jacobi_at_one(n: int, alpha: float) -> float:
    out = 1.0
    for j in range(1, n + 1):
        out *= (alpha + j) / j
    return out


def jacobi_eval_rank_one(lam, params: ModelParams, x: float) -> float:
    """Rank-one value via the classical polynomial at cos(2x)."""
    params._require_rank_one()
    first = lam.first if isinstance(lam, Weight) else int(lam)
    if first % 2 or first < 0:
        raise ValueError(f"label must be a non-negative even integer, got {first}")
    n = first // 2
    u = float(np.cos(2.0 * float(x)))
    return _classical_jacobi(n, params.alpha, params.beta, u) / _classical_jacobi_at_one(
        n, params.alpha
    )


# --------------------------------------------------------------------------
# Moment function


def moment_m(expansion: JacobiExpansion) -> float:
    """Second moment function: negative second derivative at the origin.

    Over one orbit the mean of the squared first coordinate equals the
    squared norm divided by the rank, so the value is a weighted sum of
    |mu|^2 / q over the expansion support.
    """
    q = expansion.params.q
    return float(
        sum(c * sum(e * e for e in mu.parts) / q for mu, c in expansion.coeffs.items())
    )


def moment_m_rank_one(lam, params: ModelParams) -> float:
    """Closed form lam*(lam + d*p + d - 2)/(d*p) in rank one."""
    params._require_rank_one()
    first = lam.first if isinstance(lam, Weight) else int(lam)
    return first * (first + params.d * params.p + params.d - 2.0) / (params.d * params.p)


# --------------------------------------------------------------------------
# Sampling over the coefficient algebra


def _ginibre(rng: np.random.Generator, d: int, shape) -> np.ndarray:
    if d == 1:
        return rng.standard_normal(shape)
    if d == 2:
        return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    raise UnsupportedAlgebra("matrix sampling supports d in {1, 2} only")


def _haar_batch(q: int, d: int, n: int, rng: np.random.Generator) -> np.ndarray:
    """Batch of Haar orthogonal (d=1) or unitary (d=2) q x q matrices."""
    z = _ginibre(rng, d, (n, q, q))
    qmat, rmat = np.linalg.qr(z)
    diag = np.diagonal(rmat, axis1=-2, axis2=-1).copy()
    phase = diag / np.abs(diag)
    return qmat * phase[:, None, :]


def sample_haar_unitary(q: int, d: int, rng: np.random.Generator) -> np.ndarray:
    """One Haar-distributed element of O(q) (d=1) or U(q) (d=2)."""
    return _haar_batch(q, d, 1, rng)[0]


def _mp_truncation_batch(params: ModelParams, n: int, rng: np.random.Generator) -> np.ndarray:
    p = int(params.p)
    q, d = params.q, params.d
    z = _ginibre(rng, d, (n, p, q))
    qmat, rmat = np.linalg.qr(z)
    diag = np.diagonal(rmat, axis1=-2, axis2=-1).copy()
    phase = diag / np.abs(diag)
    qmat = qmat * phase[:, None, :]
    return np.ascontiguousarray(qmat[:, :q, :])


def _log_ball_density(w: np.ndarray, exponent: float):
    """Log of det(I - w* w)^exponent, -inf outside the ball."""
    q = w.shape[-1]
    gram = np.eye(q) - np.swapaxes(w, -1, -2).conj() @ w
    eigs = np.linalg.eigvalsh(gram)
    inside = eigs[..., 0] > 0
    safe = np.clip(eigs, 1e-300, None)
    logdet = np.sum(np.log(safe), axis=-1)
    return np.where(inside, exponent * logdet, -np.inf), inside


def _mp_metropolis_batch(
    params: ModelParams,
    n: int,
    rng: np.random.Generator,
    chains: int = 64,
    burn_in: int = 1000,
    thin: int = 10,
) -> np.ndarray:
    """Random-walk Metropolis targeting the ball density for real p > 2q - 1."""
    q, d = params.q, params.d
    exponent = params.p * d / 2.0 - params.gamma
    chains = min(chains, max(1, n))
    w = np.zeros((chains, q, q), dtype=complex if d == 2 else float)
    logp, _ = _log_ball_density(w, exponent)
    eps = 0.3
    accepted = proposed = 0

    def sweep(step_eps):
        nonlocal w, logp, accepted, proposed
        prop = w + step_eps * _ginibre(rng, d, w.shape) / np.sqrt(d)
        logp_prop, _ = _log_ball_density(prop, exponent)
        logu = np.log(rng.random(chains))
        take = logu < (logp_prop - logp)
        w = np.where(take[:, None, None], prop, w)
        logp = np.where(take, logp_prop, logp)
        accepted += int(take.sum())
        proposed += chains

    for step in range(burn_in):
        sweep(eps)
        if (step + 1) % 50 == 0:
            rate = accepted / proposed
            if rate < 0.2:
                eps *= 0.7
            elif rate > 0.5:
                eps *= 1.3
            accepted = proposed = 0

    accepted = proposed = 0
    out = []
    while sum(len(b) for b in out) < n:
        for _ in range(thin):
            sweep(eps)
        out.append(w.copy())
    rate = accepted / proposed
    if not 0.05 <= rate <= 0.9:
        raise NotConverged(f"Metropolis acceptance rate {rate:.3f} outside [0.05, 0.9]")
    return np.concatenate(out)[:n]


def _mp_batch(params: ModelParams, n: int, rng: np.random.Generator) -> np.ndarray:
    if params.d not in (1, 2):
        raise UnsupportedAlgebra("ball sampling supports d in {1, 2} only")
    if params.p_is_integer and params.p >= params.q:
        return _mp_truncation_batch(params, n, rng)
    if params.p > 2 * params.q - 1:
        return _mp_metropolis_batch(params, n, rng)
    raise NonIntegerP(
        f"p={params.p} is neither an integer >= q nor above 2q-1; no sampler applies"
    )


def sample_mp(params: ModelParams, rng: np.random.Generator) -> BallMatrix:
    """One draw from the matrix-ball distribution of the model."""
    w = _mp_batch(params, 1, rng)[0]
    # Truncated blocks land on the closed ball for small p; nudge inside for
    # the strictness check of BallMatrix.
    return BallMatrix(np.asarray(w) * (1.0 - 1e-12))


# --------------------------------------------------------------------------
# Matrix-ball integral representation


def power_function(a: np.ndarray, lam) -> complex | np.ndarray:
    """Product of principal-minor powers with exponent steps from lam.

    ``lam`` may be a Weight or any weakly decreasing integer sequence; the
    exponent of the r-th leading minor is lam_r - lam_{r+1} (last entry
    exponentiates the full determinant).
    """
    parts = tuple(lam.parts) if isinstance(lam, Weight) else tuple(int(e) for e in lam)
    arr = np.asarray(a)
    q = arr.shape[-1]
    if len(parts) != q:
        from .errors import RankMismatch

        raise RankMismatch(f"label rank {len(parts)} vs matrix size {q}")
    steps = [parts[r] - (parts[r + 1] if r + 1 < q else 0) for r in range(q)]
    out = np.ones(arr.shape[:-2], dtype=arr.dtype if np.iscomplexobj(arr) else float)
    for r in range(1, q + 1):
        e = steps[r - 1]
        if e == 0:
            continue
        minor = arr[..., 0, 0] if r == 1 else np.linalg.det(arr[..., :r, :r])
        if e < 0 and np.any(minor == 0):
            raise SingularMinor(f"zero minor of order {r} raised to power {e}")
        out = out * minor**e
    return out


def _finalize_complex_mc(real_sum, real_sq, imag_sum, imag_sq, n) -> MonteCarloEstimate:
    mean_r = real_sum / n
    mean_i = imag_sum / n
    var_r = max(real_sq / n - mean_r**2, 0.0)
    var_i = max(imag_sq / n - mean_i**2, 0.0)
    return MonteCarloEstimate(
        estimate=float(mean_r),
        stderr=float(np.sqrt(var_r / n)),
        imag_mean=float(mean_i),
        imag_stderr=float(np.sqrt(var_i / n)),
        n_samples=int(n),
    )


def jacobi_eval_mc(
    lam: Weight,
    params: ModelParams,
    x,
    n_samples: int,
    rng: np.random.Generator,
    chunk: int = 1 << 16,
) -> MonteCarloEstimate:
    """Monte Carlo mean of the matrix-ball integrand for the polynomial."""
    if params.d not in (1, 2):
        raise UnsupportedAlgebra("Monte Carlo path supports d in {1, 2} only")
    vec = as_vector(x, params.q)
    if np.any(vec < 0) or np.any(np.diff(vec) > 0) or vec[0] > np.pi / 2 + 1e-12:
        raise NotInChamber(f"point {vec} is not in the alcove")
    if lam.is_zero() or not np.any(vec):
        return MonteCarloEstimate(1.0, 0.0, 0.0, 0.0, n_samples)

    q = params.q
    half = [e // 2 for e in lam.parts]
    cosx = np.diag(np.cos(vec))
    sinx = np.diag(np.sin(vec))
    real_sum = real_sq = imag_sum = imag_sq = 0.0
    done = 0
    while done < n_samples:
        nb = min(chunk, n_samples - done)
        u = _haar_batch(q, params.d, nb, rng)
        w = _mp_batch(params, nb, rng)
        wh = np.swapaxes(w, -1, -2).conj()
        left = cosx + 1j * (wh @ sinx)
        right = cosx + 1j * (sinx @ w)
        uh = np.swapaxes(u, -1, -2).conj()
        g = uh @ (left @ right) @ u
        vals = power_function(g.astype(complex), half)
        real_sum += vals.real.sum()
        real_sq += (vals.real**2).sum()
        imag_sum += vals.imag.sum()
        imag_sq += (vals.imag**2).sum()
        done += nb
    return _finalize_complex_mc(real_sum, real_sq, imag_sum, imag_sq, n_samples)
