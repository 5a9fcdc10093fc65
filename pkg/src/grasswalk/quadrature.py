"""Deterministic integration against the type-BC orthogonality weight.

Integrals are taken over the cube [0, pi/2]^q.  Because every integrand in
this package is symmetric under coordinate permutations, the cube integral
equals q! times the integral over the ordered region x1 >= ... >= xq, and
the nodes are placed there through the triangular substitution
x_j = x_{j-1} * u_j.  On the ordered region the pair-interaction factors
|sin(x_i - x_j)| lose their absolute value and the integrand is smooth, so
the tensor Gauss-Legendre rule converges at spectral rate; on the cube the
same factors have a kink across x_i = x_j for odd exponents and tensor
rules stall at a few digits.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import factorial

import numpy as np

from .errors import InvalidNodeCount
from .weights import Weight, as_vector
from . import kernels

__all__ = [
    "MultiplicityTriple",
    "QuadratureGrid",
    "make_grid",
    "bc_weight_density",
    "inner_product",
    "validate_grid",
    "recommended_nodes",
]


@dataclass(frozen=True)
class MultiplicityTriple:
    """Exponents attached to the three root lengths of type BC."""

    k1: float
    k2: float
    k3: float

    @classmethod
    def from_model(cls, d: int, p: float, q: int) -> "MultiplicityTriple":
        return cls(d * (p - q) / 2.0, (d - 1) / 2.0, d / 2.0)


def _simplex_rule(q: int, upper: float, n: int):
    """Tensor Gauss-Legendre rule on {upper >= x1 >= ... >= xq >= 0}.

    Returns (points, weights) with points of shape (n**q, q) in decreasing
    coordinate order.  Weights include the Jacobian of the triangular map
    but no symmetry factor.
    """
    t, v = np.polynomial.legendre.leggauss(n)
    x1 = upper * (t + 1.0) / 2.0
    w1 = upper * v / 2.0
    ratio = (t + 1.0) / 2.0
    wr = v / 2.0

    axes_nodes = [x1] + [ratio] * (q - 1)
    axes_weights = [w1] + [wr] * (q - 1)
    mesh = np.meshgrid(*axes_nodes, indexing="ij")
    wmesh = np.meshgrid(*axes_weights, indexing="ij")

    coords = np.empty((n**q, q))
    weights = np.ones(n**q)
    running = np.ones_like(mesh[0])
    for j in range(q):
        running = running * mesh[j]
        coords[:, j] = running.ravel()
        weights *= wmesh[j].ravel()
        if j < q - 1:
            # Jacobian factor: dx_{j+1}/du_{j+1} = x_j.
            weights *= running.ravel()
    return coords, weights


@dataclass(frozen=True)
class QuadratureGrid:
    """Quadrature data for the cube [0, pi/2]^q.

    ``nodes``/``axis_weights`` hold the one-dimensional Gauss-Legendre rule
    on (0, pi/2); ``points``/``weights`` hold the mapped tensor rule with
    the q! symmetry factor folded in, so that sums against them equal cube
    integrals of symmetric integrands.
    """

    q: int
    nodes_per_axis: int
    nodes: np.ndarray
    axis_weights: np.ndarray
    points: np.ndarray
    weights: np.ndarray

    def key(self) -> tuple[int, int]:
        return (self.q, self.nodes_per_axis)


def make_grid(q: int, nodes_per_axis: int) -> QuadratureGrid:
    if nodes_per_axis < 2:
        raise InvalidNodeCount(f"need at least 2 nodes per axis, got {nodes_per_axis}")
    if q < 1:
        raise InvalidNodeCount(f"rank must be >= 1, got {q}")
    t, v = np.polynomial.legendre.leggauss(nodes_per_axis)
    nodes = (np.pi / 4.0) * (t + 1.0)
    axis_weights = (np.pi / 4.0) * v
    points, weights = _simplex_rule(q, np.pi / 2.0, nodes_per_axis)
    weights = weights * factorial(q)
    points.setflags(write=False)
    weights.setflags(write=False)
    return QuadratureGrid(q, nodes_per_axis, nodes, axis_weights, points, weights)


def recommended_nodes(max_degree: int) -> int:
    """Default per-axis resolution for expansions up to the given degree."""
    return max(64, 2 * max_degree + 32)


def min_nodes(max_degree: int) -> int:
    """Hard floor below which expansions of this degree are refused."""
    return max_degree + 24


def bc_weight_density(x, k: MultiplicityTriple) -> np.ndarray | float:
    """Orthogonality weight on the cube.

    prod_i |2 sin x_i|^{2 k1} |2 sin 2 x_i|^{2 k2}
      * prod_{i<j} |2 sin(x_i - x_j)|^{2 k3} |2 sin(x_i + x_j)|^{2 k3}
    """
    pts = np.asarray(getattr(x, "coords", x), dtype=np.float64)
    scalar = pts.ndim == 1
    if scalar:
        pts = pts[None, :]
    q = pts.shape[1]
    out = np.ones(pts.shape[0])
    if k.k1 != 0.0:
        out *= np.prod(np.abs(2.0 * np.sin(pts)) ** (2.0 * k.k1), axis=1)
    if k.k2 != 0.0:
        out *= np.prod(np.abs(2.0 * np.sin(2.0 * pts)) ** (2.0 * k.k2), axis=1)
    if k.k3 != 0.0 and q > 1:
        for i in range(q):
            for j in range(i + 1, q):
                diff = np.abs(2.0 * np.sin(pts[:, i] - pts[:, j]))
                summ = np.abs(2.0 * np.sin(pts[:, i] + pts[:, j]))
                out *= diff ** (2.0 * k.k3) * summ ** (2.0 * k.k3)
    return float(out[0]) if scalar else out


def inner_product(f, g, grid: QuadratureGrid, k: MultiplicityTriple) -> float:
    """Weighted cube integral of f*g.

    ``f`` and ``g`` are callables taking an (n, q) array of points and
    returning n values.  Symmetric and bilinear by construction.
    """
    fv = np.asarray(f(grid.points), dtype=np.float64)
    gv = np.asarray(g(grid.points), dtype=np.float64)
    dens = bc_weight_density(grid.points, k)
    return float(np.sum(fv * gv * dens * grid.weights))


def _orbit_norm_on(grid: QuadratureGrid, k: MultiplicityTriple, lam: Weight) -> float:
    from .weights import _orbit_array  # local import to avoid cycle at module load

    vecs = _orbit_array(lam.parts)
    offsets = np.array([0, len(vecs)], dtype=np.int64)
    vals = kernels.orbit_sums(np.ascontiguousarray(vecs), offsets, grid.points)[0]
    dens = bc_weight_density(grid.points, k)
    return float(np.sum(vals * vals * dens * grid.weights))


@dataclass(frozen=True)
class GridDiagnostics:
    q: int
    nodes: int
    ref_nodes: int
    degree: int
    mass_rel_change: float
    norm_rel_change: float
    tolerance: float
    converged: bool

    def to_dict(self) -> dict:
        return {
            "q": self.q,
            "nodes": self.nodes,
            "ref_nodes": self.ref_nodes,
            "degree": self.degree,
            "mass_rel_change": self.mass_rel_change,
            "norm_rel_change": self.norm_rel_change,
            "tolerance": self.tolerance,
            "converged": self.converged,
        }


def validate_grid(grid: QuadratureGrid, k: MultiplicityTriple, degree: int,
                  tolerance: float = 1e-9) -> GridDiagnostics:
    """Compare total mass and a top-degree orbit-sum norm against a doubled grid."""
    ref = make_grid(grid.q, 2 * grid.nodes_per_axis)
    one = lambda pts: np.ones(pts.shape[0])
    mass = inner_product(one, one, grid, k)
    mass_ref = inner_product(one, one, ref, k)
    lam = Weight((degree,) + (0,) * (grid.q - 1))
    norm = _orbit_norm_on(grid, k, lam)
    norm_ref = _orbit_norm_on(ref, k, lam)
    mass_rel = abs(mass - mass_ref) / max(abs(mass_ref), 1e-300)
    norm_rel = abs(norm - norm_ref) / max(abs(norm_ref), 1e-300)
    return GridDiagnostics(
        q=grid.q,
        nodes=grid.nodes_per_axis,
        ref_nodes=ref.nodes_per_axis,
        degree=degree,
        mass_rel_change=mass_rel,
        norm_rel_change=norm_rel,
        tolerance=tolerance,
        converged=mass_rel < tolerance and norm_rel < tolerance,
    )
