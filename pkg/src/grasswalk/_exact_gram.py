"""Exact Gram matrices of orbit sums for integer-exponent weights.

When all three weight exponents are non-negative integers, the weight is a
trigonometric polynomial and every Gram entry is an exact linear
combination of pi powers with Gaussian-rational coefficients: the cube
integral of e^{ikt} over [0, pi/2] is pi/2 for k = 0 and a Gaussian
rational otherwise.  This path exists because ill-conditioned Gram
matrices (condition numbers beyond ~1e12 for the steep d = 4 weights)
cannot be assembled accurately enough in floating point, no matter how
precisely they are factorized afterwards.
"""
from __future__ import annotations

from fractions import Fraction
from functools import lru_cache

import numpy as np
from mpmath import mp, mpf


class PiPoly:
    """A number sum_j (re_j + i im_j) pi^j with rational coefficients."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms = terms if terms is not None else {}

    @classmethod
    def zero(cls) -> "PiPoly":
        return cls()

    def iadd(self, other: "PiPoly") -> "PiPoly":
        for j, (re, im) in other.terms.items():
            cre, cim = self.terms.get(j, (0, 0))
            self.terms[j] = (cre + re, cim + im)
        return self

    def iadd_scaled(self, other: "PiPoly", sre, sim) -> "PiPoly":
        for j, (re, im) in other.terms.items():
            cre, cim = self.terms.get(j, (0, 0))
            self.terms[j] = (cre + sre * re - sim * im, cim + sre * im + sim * re)
        return self

    def times(self, other: "PiPoly") -> "PiPoly":
        out: dict[int, tuple] = {}
        for j1, (r1, i1) in self.terms.items():
            for j2, (r2, i2) in other.terms.items():
                j = j1 + j2
                re = r1 * r2 - i1 * i2
                im = r1 * i2 + i1 * r2
                cre, cim = out.get(j, (0, 0))
                out[j] = (cre + re, cim + im)
        return PiPoly(out)

    def real_mpf(self):
        """Evaluate the real part; the imaginary part must vanish exactly."""
        for _, (_, im) in self.terms.items():
            if im != 0:
                raise AssertionError("exact Gram entry has nonzero imaginary part")
        total = mpf(0)
        for j, (re, _) in self.terms.items():
            frac = Fraction(re)
            total += mpf(frac.numerator) / mpf(frac.denominator) * mp.pi**j
        return total


def exact_gram_available(two_k1: float, two_k2: float, two_k3: float, q: int) -> bool:
    ints = all(float(e).is_integer() and e >= 0 for e in (two_k1, two_k2, two_k3))
    return ints and q in (1, 2)


def _sin_power_coeffs(m: int, stretch: int = 1) -> dict[int, tuple[int, int]]:
    """Gaussian-integer coefficients of (2 sin(stretch * t))^m over e^{ift}."""
    # (2 sin u)^m = (-i)^m (w - 1/w)^m with w = e^{iu}.
    rot = {0: (1, 0), 1: (0, -1), 2: (-1, 0), 3: (0, 1)}[m % 4]
    out: dict[int, tuple[int, int]] = {}
    binom = 1
    for j in range(m + 1):
        sign = -1 if j % 2 else 1
        c = sign * binom
        f = (m - 2 * j) * stretch
        re, im = out.get(f, (0, 0))
        out[f] = (re + c * rot[0], im + c * rot[1])
        binom = binom * (m - j) // (j + 1)
    return {f: c for f, c in out.items() if c != (0, 0)}


def _convolve(a: dict, b: dict) -> dict:
    out: dict[int, tuple[int, int]] = {}
    for fa, (ra, ia) in a.items():
        for fb, (rb, ib) in b.items():
            f = fa + fb
            re, im = out.get(f, (0, 0))
            out[f] = (re + ra * rb - ia * ib, im + ra * ib + ia * rb)
    return {f: c for f, c in out.items() if c != (0, 0)}


def _segment_integral(k: int) -> PiPoly:
    """Exact integral of e^{ikt} over [0, pi/2]."""
    if k == 0:
        return PiPoly({1: (Fraction(1, 2), Fraction(0))})
    r = k % 4
    if r == 0:
        return PiPoly.zero()
    if r == 2:
        return PiPoly({0: (Fraction(0), Fraction(2, k))})
    if r == 1:
        return PiPoly({0: (Fraction(1, k), Fraction(1, k))})
    return PiPoly({0: (Fraction(-1, k), Fraction(1, k))})


class ExactGramBuilder:
    """Assembles exact Gram entries for rank one and rank two."""

    def __init__(self, two_k1: int, two_k2: int, two_k3: int, q: int):
        if not exact_gram_available(two_k1, two_k2, two_k3, q):
            raise ValueError("exact Gram path requires integer exponents and q <= 2")
        self.q = q
        coord = _convolve(
            _sin_power_coeffs(int(two_k1), 1), _sin_power_coeffs(int(two_k2), 2)
        )
        self._coord = coord
        self._pair = _sin_power_coeffs(int(two_k3), 1) if q == 2 else {0: (1, 0)}
        self._chat_cache: dict[int, PiPoly] = {}
        self._dhat_cache: dict[tuple, PiPoly] = {}

    def _chat(self, k: int) -> PiPoly:
        """Integral of e^{ikt} times the per-coordinate factor over [0, pi/2]."""
        hit = self._chat_cache.get(k)
        if hit is not None:
            return hit
        total = PiPoly.zero()
        for f, (re, im) in self._coord.items():
            total.iadd_scaled(_segment_integral(k + f), Fraction(re), Fraction(im))
        self._chat_cache[k] = total
        return total

    def _dhat(self, v) -> PiPoly:
        """Cube integral of e^{i<v, x>} against the full weight."""
        key = tuple(int(e) for e in v)
        hit = self._dhat_cache.get(key)
        if hit is not None:
            return hit
        if self.q == 1:
            out = self._chat(key[0])
        else:
            v1, v2 = key
            out = PiPoly.zero()
            # Pair factors in (x1 - x2) and (x1 + x2) shift the coordinate
            # frequencies by (g + h, h - g).
            for g, (rg, ig) in self._pair.items():
                for h, (rh, ih) in self._pair.items():
                    prod = self._chat(v1 + g + h).times(self._chat(v2 + h - g))
                    out.iadd_scaled(prod, Fraction(rg * rh - ig * ih), Fraction(rg * ih + ig * rh))
        self._dhat_cache[key] = out
        return out

    def gram_entry(self, orbit_a: np.ndarray, orbit_b: np.ndarray) -> PiPoly:
        total = PiPoly.zero()
        for s in orbit_a:
            for t in orbit_b:
                total.iadd(self._dhat(s + t))
        n = len(orbit_a) * len(orbit_b)
        scaled = PiPoly({j: (re / n, im / n) for j, (re, im) in total.terms.items()})
        return scaled


def exact_gram_mpf(weights, orbit_arrays, two_k1, two_k2, two_k3, q, dps=60):
    """Exact Gram matrix of the orbit sums, evaluated to dps digits."""
    builder = ExactGramBuilder(int(two_k1), int(two_k2), int(two_k3), q)
    n = len(weights)
    old_dps = mp.dps
    try:
        mp.dps = dps
        gram_mp = [[None] * n for _ in range(n)]
        for i in range(n):
            oi = orbit_arrays[i].astype(np.int64)
            for j in range(i + 1):
                val = builder.gram_entry(oi, orbit_arrays[j].astype(np.int64)).real_mpf()
                gram_mp[i][j] = val
                gram_mp[j][i] = val
        return gram_mp
    finally:
        mp.dps = old_dps


def exact_orthonormal_rows(weights, orbit_arrays, two_k1, two_k2, two_k3, q, dps=60):
    """Exact Gram, arbitrary-precision factorization.

    Returns a dict with float64 coefficient rows (normalized to unit
    coefficient sum), the same rows in extended precision, row sums, the
    cross table <orbit sum, polynomial> and a float64 view of the Gram
    matrix.
    """
    n = len(weights)
    gram_mp = exact_gram_mpf(weights, orbit_arrays, two_k1, two_k2, two_k3, q, dps=dps)
    old_dps = mp.dps
    try:
        mp.dps = dps
        lower = [[mpf(0)] * n for _ in range(n)]
        for j in range(n):
            s = gram_mp[j][j] - sum(lower[j][k] ** 2 for k in range(j))
            lower[j][j] = mp.sqrt(s)
            for i in range(j + 1, n):
                lower[i][j] = (
                    gram_mp[i][j] - sum(lower[i][k] * lower[j][k] for k in range(j))
                ) / lower[j][j]
        inv = [[mpf(0)] * n for _ in range(n)]
        for i in range(n):
            for j in range(i):
                inv[i][j] = -sum(lower[i][k] * inv[k][j] for k in range(j, i)) / lower[i][i]
            inv[i][i] = 1 / lower[i][i]
        rowsum_mp = [sum(inv[i][j] for j in range(i + 1)) for i in range(n)]
        coeff = np.zeros((n, n))
        coeff_hp = np.zeros((n, n), dtype=np.longdouble)
        for i in range(n):
            for j in range(i + 1):
                val = inv[i][j] / rowsum_mp[i]
                coeff[i, j] = float(val)
                coeff_hp[i, j] = _to_longdouble(val)
        # Cross table <orbit sum_a, normalized polynomial_tau>; entries
        # shrink with the polynomial norms, so extended precision matters.
        cross = np.zeros((n, n), dtype=np.longdouble)
        for tau in range(n):
            scale = rowsum_mp[tau]
            for a in range(n):
                acc = mpf(0)
                for j in range(tau + 1):
                    acc += gram_mp[a][j] * inv[tau][j]
                cross[a, tau] = _to_longdouble(acc / scale)
        rowsum = np.array([_to_longdouble(v) for v in rowsum_mp])
        gram64 = np.array([[float(gram_mp[i][j]) for j in range(n)] for i in range(n)])
        return {
            "coeff_rows": coeff,
            "coeff_rows_hp": coeff_hp,
            "rowsum": rowsum,
            "cross": cross,
            "gram64": gram64,
        }
    finally:
        mp.dps = old_dps


def _to_longdouble(x) -> np.longdouble:
    if x == 0:
        return np.longdouble(0.0)
    return np.longdouble(mp.nstr(x, 25))
