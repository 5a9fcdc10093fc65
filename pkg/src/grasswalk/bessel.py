"""Flat-limit Bessel functions and the Laguerre ensemble.

The Bessel functions are the scaling limits of the polynomials; they are
evaluated by Monte Carlo averaging of a matrix phase integral, or by the
classical one-variable series in rank one.  The Laguerre ensemble is the
singular-value law of a standard Gaussian rectangular matrix over the
coefficient algebra; its transform identity against the Bessel functions
is the anchor of the central limit experiments.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import lgamma

import numpy as np

from .errors import NonIntegerP, NotInChamber, RankNotOne, SeriesRange, UnsupportedAlgebra
from .polynomials import ModelParams, MonteCarloEstimate, _ginibre, _haar_batch, _mp_batch
from .quadrature import _simplex_rule
from .weights import ChamberPoint, as_vector

__all__ = [
    "LaguerreEnsemble",
    "bessel_eval_mc",
    "bessel_eval_rank_one",
    "laguerre_density",
    "laguerre_sample",
    "gaussian_transform_residual",
    "GaussianTransformReport",
]

SERIES_MAX_ARG = 50.0
SERIES_TERMS = 80


def _phase_matrices(params: ModelParams, n: int, rng: np.random.Generator) -> np.ndarray:
    """Batch of real matrices T with T[a, b] = Re(w[a, b] * u[b, a])."""
    w = _mp_batch(params, n, rng)
    u = _haar_batch(params.q, params.d, n, rng)
    return np.real(w * np.swapaxes(u, -1, -2))


def bessel_eval_mc(
    lam,
    x,
    params: ModelParams,
    n_samples: int,
    rng: np.random.Generator,
    chunk: int = 1 << 17,
) -> MonteCarloEstimate:
    """Monte Carlo value of the Bessel function at spectral parameter lam.

    The integrand is exp(i * lam^T T x) over the matrix-ball and unitary
    draws; the real part is the estimate and the imaginary part must vanish
    within its own standard error.
    """
    if params.d not in (1, 2):
        raise UnsupportedAlgebra("Monte Carlo path supports d in {1, 2} only")
    lam_vec = as_vector(lam, params.q)
    x_vec = as_vector(x, params.q)
    if not np.any(lam_vec) or not np.any(x_vec):
        return MonteCarloEstimate(1.0, 0.0, 0.0, 0.0, n_samples)
    real_sum = real_sq = imag_sum = imag_sq = 0.0
    done = 0
    while done < n_samples:
        nb = min(chunk, n_samples - done)
        t = _phase_matrices(params, nb, rng)
        phases = np.einsum("a,jab,b->j", lam_vec, t, x_vec)
        c, s = np.cos(phases), np.sin(phases)
        real_sum += c.sum()
        real_sq += (c * c).sum()
        imag_sum += s.sum()
        imag_sq += (s * s).sum()
        done += nb
    mean_r = real_sum / n_samples
    mean_i = imag_sum / n_samples
    var_r = max(real_sq / n_samples - mean_r**2, 0.0)
    var_i = max(imag_sq / n_samples - mean_i**2, 0.0)
    return MonteCarloEstimate(
        float(mean_r),
        float(np.sqrt(var_r / n_samples)),
        float(mean_i),
        float(np.sqrt(var_i / n_samples)),
        n_samples,
    )


def bessel_eval_rank_one(lam: float, x: float, params: ModelParams) -> float:
    """Normalized one-variable Bessel series at z = lam * x.

    j(z) = sum_m (-z^2/4)^m / (m! (a+1)_m) with index a = d p / 2 - 1;
    the truncated series is validated for |z| <= 50.
    """
    params._require_rank_one()
    z = float(lam) * float(x)
    if abs(z) > SERIES_MAX_ARG:
        raise SeriesRange(f"|lam * x| = {abs(z):.3g} exceeds the validated range {SERIES_MAX_ARG}")
    a = params.d * params.p / 2.0 - 1.0
    if abs(z) > 25.0:
        # The alternating terms peak near exp(|z|); float64 cancellation would
        # wipe out the answer, so sum with enough guard digits.
        from mpmath import mp, mpf

        old = mp.dps
        try:
            mp.dps = 40
            term = mpf(1)
            total = mpf(1)
            w = -mpf(z) ** 2 / 4
            for m in range(1, SERIES_TERMS + 1):
                term *= w / (m * (a + m))
                total += term
            return float(total)
        finally:
            mp.dps = old
    term = 1.0
    total = 1.0
    w = -(z * z) / 4.0
    for m in range(1, SERIES_TERMS + 1):
        term *= w / (m * (a + m))
        total += term
    return float(total)


@dataclass
class LaguerreEnsemble:
    """Singular-value law of a standard Gaussian p x q matrix over the algebra."""

    params: ModelParams
    truncation: float = 8.0
    nodes: int = 400

    def __post_init__(self):
        self._c_dp: float | None = None

    def _chamber_rule(self):
        return _simplex_rule(self.params.q, self.truncation, self.nodes)

    def _unnormalized(self, pts: np.ndarray) -> np.ndarray:
        d, p, q = self.params.d, self.params.p, self.params.q
        expo = d * (p - q + 1) - 1
        out = np.exp(-0.5 * (pts**2).sum(axis=1))
        if expo != 0:
            out = out * np.prod(pts**expo, axis=1)
        for i in range(q):
            for j in range(i + 1, q):
                out = out * (pts[:, i] ** 2 - pts[:, j] ** 2) ** d
        return out

    @property
    def c_dp(self) -> float:
        if self._c_dp is None:
            pts, wts = self._chamber_rule()
            self._c_dp = float((self._unnormalized(pts) * wts).sum())
        return self._c_dp


def laguerre_density(x, ens: LaguerreEnsemble) -> float:
    """Normalized ensemble density at a chamber point."""
    vec = as_vector(x, ens.params.q)
    if np.any(vec < 0) or np.any(np.diff(vec) > 0):
        raise NotInChamber(f"point {vec} is not decreasing and non-negative")
    return float(ens._unnormalized(vec[None, :])[0] / ens.c_dp)


def _laguerre_batch(ens: LaguerreEnsemble, n: int, rng: np.random.Generator) -> np.ndarray:
    params = ens.params
    if not params.p_is_integer:
        raise NonIntegerP("matrix sampling requires integer p; compare densities instead")
    p, q, d = int(params.p), params.q, params.d
    if d in (1, 2):
        mat = _ginibre(rng, d, (n, p, q))
        vals = np.linalg.svd(mat, compute_uv=False)
        return vals
    # d = 4: complex 2p x 2q block embedding; singular values come in pairs.
    z1 = rng.standard_normal((n, p, q)) + 1j * rng.standard_normal((n, p, q))
    z2 = rng.standard_normal((n, p, q)) + 1j * rng.standard_normal((n, p, q))
    top = np.concatenate([z1, z2], axis=2)
    bottom = np.concatenate([-z2.conj(), z1.conj()], axis=2)
    vals = np.linalg.svd(np.concatenate([top, bottom], axis=1), compute_uv=False)
    return vals[:, 0::2]


def laguerre_sample(ens: LaguerreEnsemble, rng: np.random.Generator) -> ChamberPoint:
    """One draw: decreasingly ordered singular values."""
    return ChamberPoint.chamber(_laguerre_batch(ens, 1, rng)[0])


def laguerre_moments(ens: LaguerreEnsemble) -> dict:
    """Coordinate means and the squared-norm mean, by chamber quadrature."""
    pts, wts = ens._chamber_rule()
    dens = ens._unnormalized(pts) * wts / ens.c_dp
    means = dens @ pts
    sq = float(dens @ (pts**2).sum(axis=1))
    return {"coordinate_means": means.tolist(), "mean_square_norm": sq}


def laguerre_marginal_cdf(ens: LaguerreEnsemble, xs: np.ndarray) -> np.ndarray:
    """CDF of the largest coordinate, by quadrature (ranks one and two)."""
    q = ens.params.q
    r = ens.truncation
    grid = np.linspace(0.0, r, 4096)
    if q == 1:
        dens = ens._unnormalized(grid[:, None]) / ens.c_dp
    elif q == 2:
        t, v = np.polynomial.legendre.leggauss(96)
        half = (t + 1.0) / 2.0
        dens = np.empty_like(grid)
        for i, x1 in enumerate(grid):
            x2 = x1 * half
            pts = np.column_stack([np.full_like(x2, x1), x2])
            dens[i] = (ens._unnormalized(pts) * v / 2.0).sum() * x1 / ens.c_dp
    else:
        raise RankNotOne("marginal quadrature implemented for ranks one and two")
    cdf = np.concatenate([[0.0], np.cumsum((dens[1:] + dens[:-1]) / 2.0 * np.diff(grid))])
    cdf = cdf / cdf[-1]
    return np.interp(xs, grid, cdf)


@dataclass(frozen=True)
class GaussianTransformReport:
    lam: tuple[float, ...]
    target: float
    estimate: float
    stderr: float
    residual: float
    n_ensemble: int
    n_bessel: int
    seed: int | None = None

    def to_dict(self) -> dict:
        return {
            "lambda": list(self.lam),
            "target": self.target,
            "estimate": self.estimate,
            "stderr": self.stderr,
            "residual": self.residual,
            "n_samples": {"ensemble": self.n_ensemble, "bessel": self.n_bessel},
            "seed": self.seed,
        }


def gaussian_transform_residual(
    lam,
    params: ModelParams,
    n_ensemble: int,
    n_bessel: int,
    rng: np.random.Generator,
    seed: int | None = None,
) -> GaussianTransformReport:
    """Ensemble average of the Bessel function against its Gaussian target.

    The double Monte Carlo shares one set of phase matrices across all
    ensemble draws; the standard error combines the between-row and
    between-column variances of the crossed design.
    """
    lam_vec = as_vector(lam, params.q)
    target = float(np.exp(-0.5 * (lam_vec**2).sum()))
    if not np.any(lam_vec):
        return GaussianTransformReport(
            tuple(lam_vec), target, 1.0, 0.0, abs(1.0 - target), n_ensemble, n_bessel, seed
        )
    ens = LaguerreEnsemble(params)
    draws = _laguerre_batch(ens, n_ensemble, rng)
    t = _phase_matrices(params, n_bessel, rng)
    q = params.q
    left = (lam_vec[:, None] * draws[:, None, :]).reshape(n_ensemble, q * q)
    right = t.reshape(n_bessel, q * q)
    row_sums = np.zeros(n_ensemble)
    col_means = np.empty(n_bessel)
    total = 0.0
    chunk = max(1, 50_000_000 // max(n_ensemble, 1))
    for start in range(0, n_bessel, chunk):
        vals = np.cos(left @ right[start:start + chunk].T)
        row_sums += vals.sum(axis=1)
        col_means[start:start + chunk] = vals.mean(axis=0)
        total += vals.sum()
    estimate = total / (n_ensemble * n_bessel)
    row_means = row_sums / n_bessel
    stderr = float(
        np.sqrt(row_means.var(ddof=1) / n_ensemble + col_means.var(ddof=1) / n_bessel)
    )
    return GaussianTransformReport(
        tuple(lam_vec),
        target,
        float(estimate),
        stderr,
        abs(float(estimate) - target),
        n_ensemble,
        n_bessel,
        seed,
    )
