"""The dual convolution on dominant even weights.

Multiplying two normalized polynomials and re-expanding over the family
gives a row of linearization coefficients; rows sum to one and are
non-negative in the group cases, which turns point masses into a
probability-preserving convolution.  Products are formed exactly in the
orbit-sum basis (orbit vectors add, integer combinatorics), so a row costs
one table contraction.
"""
from __future__ import annotations

import json
import os
import threading
from dataclasses import dataclass, field

import numpy as np

from .errors import GridUnderResolved, NumericBreakdown, RankMismatch
from .polynomials import ExpansionBasis, ModelParams, get_basis, jacobi_eval, jacobi_expand, moment_m
from .quadrature import QuadratureGrid, min_nodes
from .weights import Weight, _orbit_array, as_vector, make_weight, weights_below

__all__ = [
    "WeightMeasure",
    "CoeffCache",
    "linearize",
    "convolve",
    "haar_weight",
    "check_admissible",
    "modified_variance",
    "fourier_transform",
]

NOISE_CLAMP = 1e-8
DROP_FLOOR = 1e-14


@dataclass(frozen=True)
class WeightMeasure:
    """A finitely supported measure on dominant even weights.

    Probability measures have non-negative masses summing to one;
    linearization rows may carry genuinely negative entries for fractional
    parameters, in which case ``flagged_negative`` is set and the measure
    must not be used as a transition row.
    """

    masses: dict[Weight, float]
    flagged_negative: bool = False

    @classmethod
    def point(cls, w: Weight) -> "WeightMeasure":
        return cls({w: 1.0})

    @classmethod
    def probability(cls, masses: dict[Weight, float], tol: float = 1e-10) -> "WeightMeasure":
        total = 0.0
        cleaned: dict[Weight, float] = {}
        for w, m in masses.items():
            if m < -tol:
                raise ValueError(f"negative mass {m} at {w}")
            m = max(m, 0.0)
            if m > 0.0:
                cleaned[w] = m
            total += m
        if abs(total - 1.0) > tol:
            raise ValueError(f"masses sum to {total}, not 1")
        return cls({w: m / total for w, m in cleaned.items()})

    @classmethod
    def from_text(cls, text: str, q: int) -> "WeightMeasure":
        """Parse ``"4,2:0.5;2,0:0.5"`` style weight:mass lists."""
        masses: dict[Weight, float] = {}
        for token in text.split(";"):
            token = token.strip()
            if not token:
                continue
            wtext, _, mtext = token.rpartition(":")
            masses[Weight.from_text(wtext, q=q)] = masses.get(
                Weight.from_text(wtext, q=q), 0.0
            ) + float(mtext)
        return cls.probability(masses)

    def to_text(self) -> str:
        return ";".join(f"{w.to_text()}:{m!r}" for w, m in sorted(self.masses.items()))

    @property
    def support(self) -> list[Weight]:
        return sorted(self.masses)

    def total(self) -> float:
        return float(sum(self.masses.values()))

    def max_first(self) -> int:
        return max((w.first for w in self.masses), default=0)

    def __call__(self, w: Weight) -> float:
        return self.masses.get(w, 0.0)

    def items(self):
        return self.masses.items()


# --------------------------------------------------------------------------
# Row computation


def _raw_row(basis: ExpansionBasis, lam: Weight, mu: Weight) -> np.ndarray:
    """Coefficient row of the product of the polynomials lam and mu.

    The product is first expressed over orbit sums: both factors expand over
    their dominance ideals, and pairs of orbit sums multiply exactly by
    orbit-vector addition.  Projecting onto each polynomial is then one
    contraction with the precomputed cross table.  All mixing happens in the
    factorization precision: the cross columns for deep polynomials are many
    orders below the orbit-sum scale.
    """
    dtype = basis.cross.dtype
    n = len(basis.weights)
    ci = basis.coeff_rows_hp[basis.index[lam.parts]]
    cj = basis.coeff_rows_hp[basis.index[mu.parts]]
    ai = np.flatnonzero(np.abs(np.asarray(ci, dtype=np.float64)) > 0.0)
    bj = np.flatnonzero(np.abs(np.asarray(cj, dtype=np.float64)) > 0.0)
    prod = np.zeros(n, dtype=dtype)
    for a in ai:
        wa = basis.weights[a]
        ca = ci[a]
        for b in bj:
            idx, vals = basis.pair_product(wa, basis.weights[b])
            prod[idx] += (ca * cj[b]) * vals.astype(dtype)
    row = (prod @ basis.cross) / basis.norms
    return np.asarray(row, dtype=np.float64)


def _clean_row(basis: ExpansionBasis, lam: Weight, mu: Weight, row: np.ndarray) -> WeightMeasure:
    target = lam.add(mu)
    ideal = {w.parts for w in weights_below(target)}
    masses: dict[Weight, float] = {}
    flagged = False
    stray = 0.0
    for w, c in zip(basis.weights, row):
        if w.parts not in ideal:
            stray = max(stray, abs(c))
            continue
        if c <= -NOISE_CLAMP:
            masses[w] = float(c)
            flagged = True
        elif c < 0.0:
            continue  # quadrature noise, clamp to zero
        elif c >= DROP_FLOOR:
            masses[w] = float(c)
    if stray > NOISE_CLAMP:
        raise NumericBreakdown(
            f"linearization of {lam} * {mu} leaks {stray:.2e} outside the dominance ideal"
        )
    if not flagged:
        total = sum(masses.values())
        masses = {w: c / total for w, c in masses.items()}
    return WeightMeasure(masses, flagged_negative=flagged)


class CoeffCache:
    """Linearization-row cache: in-memory, optionally persisted as JSON.

    One file per (d, p, q, grid) signature; concurrent readers are fine,
    insertions are serialized.
    """

    def __init__(self, directory: str | None = None):
        self.directory = directory
        self._mem: dict[tuple, dict[str, WeightMeasure]] = {}
        self._lock = threading.RLock()
        self._dirty: set[tuple] = set()

    @staticmethod
    def _file_key(params: ModelParams, grid: QuadratureGrid) -> tuple:
        return (params.d, float(params.p), params.q, grid.nodes_per_axis)

    def _path(self, key: tuple) -> str:
        d, p, q, nodes = key
        name = f"rows_d{d}_p{p}_q{q}_n{nodes}.json"
        return os.path.join(self.directory, name)

    def _table(self, params, grid) -> dict[str, WeightMeasure]:
        key = self._file_key(params, grid)
        with self._lock:
            table = self._mem.get(key)
            if table is None:
                table = {}
                if self.directory is not None:
                    path = self._path(key)
                    if os.path.exists(path):
                        with open(path) as fh:
                            raw = json.load(fh)
                        for rk, entry in raw["rows"].items():
                            masses = {
                                make_weight([int(t) for t in wtext.split(",")]): c
                                for wtext, c in entry["masses"]
                            }
                            table[rk] = WeightMeasure(masses, entry["flagged"])
                self._mem[key] = table
            return table

    def get(self, params, grid, lam: Weight, mu: Weight) -> WeightMeasure | None:
        rk = f"{lam.to_text()}|{mu.to_text()}"
        return self._table(params, grid).get(rk)

    def put(self, params, grid, lam: Weight, mu: Weight, row: WeightMeasure):
        key = self._file_key(params, grid)
        rk = f"{lam.to_text()}|{mu.to_text()}"
        with self._lock:
            self._table(params, grid)[rk] = row
            self._dirty.add(key)

    def flush(self):
        if self.directory is None:
            return
        with self._lock:
            os.makedirs(self.directory, exist_ok=True)
            for key in self._dirty:
                rows = {
                    rk: {
                        "flagged": m.flagged_negative,
                        "masses": [[w.to_text(), c] for w, c in sorted(m.masses.items())],
                    }
                    for rk, m in self._mem[key].items()
                }
                tmp = self._path(key) + ".tmp"
                with open(tmp, "w") as fh:
                    json.dump({"rows": rows}, fh)
                os.replace(tmp, self._path(key))
            self._dirty.clear()


_DEFAULT_CACHE = CoeffCache()


def linearize(
    lam: Weight,
    mu: Weight,
    params: ModelParams,
    grid: QuadratureGrid,
    cache: CoeffCache | None = None,
) -> WeightMeasure:
    """Expand the product of the polynomials labelled lam and mu.

    Returns the coefficient row as a measure: support inside the dominance
    ideal of lam + mu, entries summing to one.  Noise-scale negatives are
    clamped and renormalized; genuine negatives (possible for fractional
    parameters) are kept and flagged.
    """
    if lam.rank != mu.rank or lam.rank != params.q:
        raise RankMismatch("weight ranks must match the model rank")
    cache = cache or _DEFAULT_CACHE
    a, b = (lam, mu) if lam.parts >= mu.parts else (mu, lam)
    hit = cache.get(params, grid, a, b)
    if hit is not None:
        return hit
    target = lam.add(mu)
    if grid.nodes_per_axis < min_nodes(target.first):
        raise GridUnderResolved(
            f"{grid.nodes_per_axis} nodes per axis insufficient for degree {target.first}"
        )
    basis = get_basis(params, grid, target.first)
    row = _clean_row(basis, lam, mu, _raw_row(basis, lam, mu))
    cache.put(params, grid, a, b, row)
    return row


def convolve(
    nu1: WeightMeasure,
    nu2: WeightMeasure,
    params: ModelParams,
    grid: QuadratureGrid,
    cache: CoeffCache | None = None,
) -> WeightMeasure:
    """Bilinear extension of the point-mass convolution."""
    out: dict[Weight, float] = {}
    flagged = False
    for lam, m1 in nu1.items():
        for mu, m2 in nu2.items():
            row = linearize(lam, mu, params, grid, cache=cache)
            flagged = flagged or row.flagged_negative
            scale = m1 * m2
            for tau, c in row.items():
                out[tau] = out.get(tau, 0.0) + scale * c
    out = {w: c for w, c in out.items() if abs(c) >= DROP_FLOOR}
    return WeightMeasure(out, flagged_negative=flagged)


def haar_weight(lam: Weight, params: ModelParams, grid: QuadratureGrid) -> float:
    """Reciprocal of the coefficient back to the origin: mass ratio, >= 1."""
    basis = get_basis(params, grid, lam.first)
    i = basis.index[lam.parts]
    return float(basis.mass / basis.norms[i])


@dataclass(frozen=True)
class AdmissibilityReport:
    admissible_up_to_cap: bool
    degree_cap: int
    rows_scanned: int
    worst_value: float
    worst_location: tuple[str, str, str] | None

    def to_dict(self) -> dict:
        return {
            "admissible_up_to_cap": self.admissible_up_to_cap,
            "degree_cap": self.degree_cap,
            "rows_scanned": self.rows_scanned,
            "worst_value": self.worst_value,
            "worst_location": list(self.worst_location) if self.worst_location else None,
        }


def check_admissible(
    nu: WeightMeasure,
    params: ModelParams,
    grid: QuadratureGrid,
    degree_cap: int,
    cache: CoeffCache | None = None,
) -> AdmissibilityReport:
    """Scan linearization rows against every weight up to the cap.

    The verdict is only "admissible up to the cap": the full index set is
    infinite and is never claimed.
    """
    from .weights import enumerate_weights

    worst = 0.0
    location = None
    scanned = 0
    for lam in nu.support:
        for mu in enumerate_weights(params.q, degree_cap):
            row = linearize(lam, mu, params, grid, cache=cache)
            scanned += 1
            for tau, c in row.items():
                if c < worst:
                    worst = c
                    location = (lam.to_text(), mu.to_text(), tau.to_text())
    return AdmissibilityReport(
        admissible_up_to_cap=worst > -NOISE_CLAMP,
        degree_cap=degree_cap,
        rows_scanned=scanned,
        worst_value=float(worst),
        worst_location=location,
    )


def modified_variance(nu: WeightMeasure, params: ModelParams, grid: QuadratureGrid) -> float:
    """Mean of the second moment function under the measure."""
    total = 0.0
    for lam, mass in nu.items():
        if lam.is_zero():
            continue
        total += mass * moment_m(jacobi_expand(lam, params, grid))
    return float(total)


def fourier_transform(
    nu: WeightMeasure, x, params: ModelParams, grid: QuadratureGrid
) -> float:
    """Pointwise transform: mass-weighted sum of polynomial values."""
    vec = as_vector(x, params.q)
    total = 0.0
    for lam, mass in nu.items():
        total += mass * jacobi_eval(jacobi_expand(lam, params, grid), vec)
    return float(total)
