"""Truncated half-line grids and the sum-difference integral operators.

The operator x -> int_0^inf (K(x-t) - K(x+t)) p(t) dt is discretized on
[0, x_max] with a precomputed (node x node) kernel matrix, so each application
is one matrix-vector product.  The remainder beyond x_max is added analytically
from a tail model (zero, constant, or linear) through the kernel's cumulative
integral and partial first moment.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .kernels import KernelSpec

__all__ = [
    "Grid",
    "Profile",
    "TailModel",
    "build_grid",
    "apply_sum_difference",
    "apply_weighted_sum_difference",
    "apply_wiener_hopf",
    "derivative_moment",
]

SCHEME_SIMPSON = "uniform-simpson"
SCHEME_GAUSS = "panel-gauss"

# beyond this node count the O(n^2) matrices would exceed the memory ceiling;
# operator application falls back to blocked on-the-fly evaluation
MATRIX_NODE_LIMIT = 4096

# 5-point Gauss-Lobatto rule on [-1, 1]; endpoints included so panels chain
_LOBATTO_NODES = np.array(
    [-1.0, -np.sqrt(3.0 / 7.0), 0.0, np.sqrt(3.0 / 7.0), 1.0]
)
_LOBATTO_WEIGHTS = np.array([0.1, 49.0 / 90.0, 32.0 / 45.0, 49.0 / 90.0, 0.1])


@dataclass
class Grid:
    """Nodes and quadrature weights on [0, x_max]."""

    x_max: float
    nodes: np.ndarray
    weights: np.ndarray
    scheme: str
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if self.nodes[0] != 0.0 or abs(self.nodes[-1] - self.x_max) > 1e-12:
            raise ValueError("grid must span [0, x_max] exactly")
        if np.any(np.diff(self.nodes) <= 0.0):
            raise ValueError("grid nodes must be strictly increasing")
        if abs(self.weights.sum() - self.x_max) > 1e-12 * self.x_max:
            raise ValueError("weights must integrate constants exactly")

    def __len__(self) -> int:
        return len(self.nodes)

    def fingerprint(self) -> tuple:
        return (self.x_max, len(self.nodes), self.scheme)


@dataclass
class Profile:
    """Node values of a function bound to a grid."""

    grid: Grid
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if len(self.values) != len(self.grid):
            raise ValueError("value count must match node count")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("profile contains non-finite values")

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))


@dataclass(frozen=True)
class TailModel:
    """Analytic continuation of a profile beyond x_max."""

    kind: str
    const: float = 0.0
    slope: float = 0.0
    intercept: float = 0.0

    @classmethod
    def zero(cls) -> "TailModel":
        return cls(kind="zero")

    @classmethod
    def constant(cls, c: float) -> "TailModel":
        return cls(kind="constant", const=float(c))

    @classmethod
    def linear(cls, slope: float, intercept: float) -> "TailModel":
        return cls(kind="linear", slope=float(slope), intercept=float(intercept))


def build_grid(x_max: float, n: int, scheme: str = SCHEME_SIMPSON) -> Grid:
    """Build a quadrature grid on [0, x_max].

    uniform-simpson needs an odd node count; panel-gauss chains 5-point
    Gauss-Lobatto panels and needs n = 4k + 1.
    """
    if x_max <= 0.0:
        raise ValueError("x_max must be positive")
    if n < 33:
        raise ValueError("need at least 33 nodes")
    if scheme == SCHEME_SIMPSON:
        if n % 2 == 0:
            raise ValueError("uniform-simpson needs an odd node count")
        nodes = np.linspace(0.0, x_max, n)
        h = nodes[1] - nodes[0]
        weights = np.full(n, 2.0)
        weights[1::2] = 4.0
        weights[0] = weights[-1] = 1.0
        weights *= h / 3.0
    elif scheme == SCHEME_GAUSS:
        if (n - 1) % 4 != 0:
            raise ValueError("panel-gauss needs node count of the form 4k + 1")
        panels = (n - 1) // 4
        edges = np.linspace(0.0, x_max, panels + 1)
        half = (edges[1] - edges[0]) / 2.0
        nodes = np.empty(n)
        weights = np.zeros(n)
        for p in range(panels):
            mid = (edges[p] + edges[p + 1]) / 2.0
            sl = slice(4 * p, 4 * p + 5)
            nodes[sl] = mid + half * _LOBATTO_NODES
            weights[sl] += half * _LOBATTO_WEIGHTS
        nodes[0], nodes[-1] = 0.0, x_max
    else:
        raise ValueError(f"unknown scheme {scheme!r}")
    return Grid(x_max=x_max, nodes=nodes, weights=weights, scheme=scheme)


class _OperatorWorkspace:
    """Kernel matrices and tail-correction factors for one (kernel, grid) pair.

    Tail factors are assembled from one-sided tail masses so that they vanish
    identically at x = 0 instead of cancelling in floating point.
    """

    def __init__(self, kernel: KernelSpec, grid: Grid):
        x = grid.nodes
        L = grid.x_max
        self.dense = len(grid) <= MATRIX_NODE_LIMIT
        if self.dense:
            diff = x[:, None] - x[None, :]
            summ = x[:, None] + x[None, :]
            self.sum_diff = (kernel(diff) - kernel(summ)) * grid.weights[None, :]
            self.wiener = kernel(diff) * grid.weights[None, :]
        else:
            self.kernel = kernel
            self.grid = grid
        # int_L^inf (K(x-t) - K(x+t)) dt and int_L^inf K(x-t) dt
        tail_lo = kernel.tail_mass(L - x)
        tail_hi = kernel.tail_mass(L + x)
        self.const_sum_diff = tail_lo - tail_hi
        self.const_wiener = tail_lo
        # int_L^inf (K(x-t) - K(x+t)) t dt, via the partial first moment
        m_lo = kernel.tail_first_moment(L - x)
        m_hi = kernel.tail_first_moment(L + x)
        self.lin_sum_diff = (m_lo + x * tail_lo) - (m_hi - x * tail_hi)
        # quadrature row of K'(t), for ratio limits at the origin
        self.deriv_row = grid.weights * kernel.deriv_fn(x)

    def _matvec(self, values: np.ndarray, reflected: bool) -> np.ndarray:
        if self.dense:
            mat = self.sum_diff if reflected else self.wiener
            return mat @ values
        x = self.grid.nodes
        out = np.empty_like(values)
        wv = self.grid.weights * values
        for lo in range(0, len(x), 256):
            hi = min(lo + 256, len(x))
            rows = self.kernel(x[lo:hi, None] - x[None, :])
            if reflected:
                rows = rows - self.kernel(x[lo:hi, None] + x[None, :])
            out[lo:hi] = rows @ wv
        return out


def _workspace(kernel: KernelSpec, grid: Grid) -> _OperatorWorkspace:
    key = kernel.cache_key()
    ws = grid._cache.get(key)
    if ws is None:
        ws = _OperatorWorkspace(kernel, grid)
        grid._cache[key] = ws
    return ws


def _tail_term(ws: _OperatorWorkspace, tail: TailModel, reflected: bool) -> np.ndarray | float:
    const_factor = ws.const_sum_diff if reflected else ws.const_wiener
    if tail.kind == "zero":
        return 0.0
    if tail.kind == "constant":
        return tail.const * const_factor
    if tail.kind == "linear":
        if not reflected:
            raise NotImplementedError("linear tail is only defined for the sum-difference operator")
        return tail.intercept * const_factor + tail.slope * ws.lin_sum_diff
    raise ValueError(f"unknown tail kind {tail.kind!r}")


def apply_sum_difference(kernel: KernelSpec, p: Profile, tail: TailModel) -> Profile:
    """x -> int_0^inf (K(x-t) - K(x+t)) p(t) dt with analytic tail remainder."""
    ws = _workspace(kernel, p.grid)
    out = ws._matvec(p.values, reflected=True) + _tail_term(ws, tail, reflected=True)
    return Profile(grid=p.grid, values=out, meta={"operator": "sum-difference"})


def apply_weighted_sum_difference(
    kernel: KernelSpec, p: Profile, multiplier: np.ndarray, tail: TailModel
) -> Profile:
    """Sum-difference operator with a node-wise multiplier on the input.

    The multiplier is assumed to tend to 1 at infinity (the envelope term
    vanishes there), so the tail remainder is the unweighted one.
    """
    multiplier = np.asarray(multiplier, dtype=float)
    if len(multiplier) != len(p.grid):
        raise ValueError("multiplier length must match node count")
    ws = _workspace(kernel, p.grid)
    out = ws._matvec(multiplier * p.values, reflected=True) + _tail_term(ws, tail, reflected=True)
    return Profile(grid=p.grid, values=out, meta={"operator": "weighted-sum-difference"})


def apply_wiener_hopf(kernel: KernelSpec, p: Profile, tail: TailModel) -> Profile:
    """x -> int_0^inf K(x-t) p(t) dt, the difference-only (no reflection) operator."""
    ws = _workspace(kernel, p.grid)
    out = ws._matvec(p.values, reflected=False) + _tail_term(ws, tail, reflected=False)
    return Profile(grid=p.grid, values=out, meta={"operator": "wiener-hopf"})


def derivative_moment(kernel: KernelSpec, grid: Grid, values: np.ndarray) -> float:
    """int_0^L K'(t) v(t) dt on the grid; used for operator-ratio limits at 0."""
    ws = _workspace(kernel, grid)
    return float(ws.deriv_row @ np.asarray(values, dtype=float))
