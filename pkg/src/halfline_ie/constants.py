"""Scalar characteristics of a problem instance: the coupling constant M, the
characteristic roots, and the geometric convergence-rate bound."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .exceptions import DivergenceError

__all__ = [
    "Constants",
    "bisect_root",
    "compute_M",
    "compute_eta",
    "compute_xi",
    "compute_rate_k",
    "finalize_constants",
]

_ROOT_TOL = 1e-12
_ROOT_VERIFY_TOL = 1e-10


@dataclass
class Constants:
    """Characteristic scalars of one nonlinear problem instance.

    eta is the positive fixed point of Q; xi the positive root of
    Q(u) = (1+M)u; sigma0 the estimated lower bound of the operator-ratio
    profile; k_rate the induced geometric contraction factor and C_bound the
    matching error-constant.
    """

    M: float
    xi: float
    eta: float
    sigma0: float
    epsilon0: float
    k_rate: float
    C_bound: float

    def to_dict(self) -> dict:
        return {
            "M": self.M,
            "xi": self.xi,
            "eta": self.eta,
            "sigma0": self.sigma0,
            "epsilon0": self.epsilon0,
            "k_rate": self.k_rate,
            "C_bound": self.C_bound,
        }


def bisect_root(fn, lo: float, hi: float, max_iter: int = 200) -> float:
    """Bisection on a bracketing interval; expands hi by doubling if needed."""
    flo, fhi = fn(lo), fn(hi)
    grow = 0
    while flo * fhi > 0.0 and grow < 64:
        hi *= 2.0
        fhi = fn(hi)
        grow += 1
    if flo * fhi > 0.0:
        raise ValueError("no sign change found; root bracketing failed")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        fm = fn(mid)
        if fm == 0.0 or (hi - lo) < _ROOT_TOL * max(1.0, abs(mid)):
            return mid
        if flo * fm < 0.0:
            hi = mid
        else:
            lo, flo = mid, fm
    return 0.5 * (lo + hi)


def compute_M(kernel, omega) -> float:
    """M = sup K * int_0^inf mu(t) dt, by adaptive quadrature of the envelope
    over the whole half-line."""
    sup_k = float(kernel(0.0))
    total, err = quad(
        lambda t: float(omega.envelope(np.asarray(t))), 0.0, np.inf, limit=400
    )
    if not math.isfinite(total) or err > 1e-8 * max(abs(total), 1.0):
        raise DivergenceError("envelope integral does not stabilize; M undefined")
    return total * sup_k


def _positive_root(fn, label: str) -> float:
    """Smallest sign change of fn on a geometric probe ladder, refined by bisection."""
    probes = np.geomspace(1e-8, 1e8, 328)
    vals = np.array([fn(u) for u in probes])
    idx = np.nonzero(vals[:-1] * vals[1:] < 0.0)[0]
    if len(idx) == 0:
        raise ValueError(f"no positive root found for {label}")
    i = idx[-1]
    return bisect_root(fn, probes[i], probes[i + 1])


def compute_eta(q) -> float:
    """Unique positive fixed point of Q."""
    root = _positive_root(lambda u: float(q.q(u)) - u, "Q(u) = u")
    if abs(float(q.q(root)) - root) > _ROOT_VERIFY_TOL * max(1.0, root):
        raise ValueError("fixed-point residual exceeds verification tolerance")
    return root


def compute_xi(q, M: float) -> float:
    """Positive root of Q(u) = (1+M)u; coincides with eta when M = 0."""
    if M < 0.0:
        raise ValueError("M must be nonnegative")
    if M == 0.0:
        return compute_eta(q)
    root = _positive_root(lambda u: float(q.q(u)) - (1.0 + M) * u, "Q(u) = (1+M)u")
    target = (1.0 + M) * root
    if abs(float(q.q(root)) - target) > _ROOT_VERIFY_TOL * max(1.0, target):
        raise ValueError("characteristic-root residual exceeds verification tolerance")
    return root


def compute_rate_k(sigma0: float, epsilon0: float, minorant) -> float:
    """k = (1 - m(eps0*sigma0)) / (1 - eps0*sigma0); must land in (0, 1)."""
    if not 0.0 < sigma0 < 1.0 or not 0.0 < epsilon0 < 1.0:
        raise ValueError("sigma0 and epsilon0 must lie in (0, 1)")
    s = epsilon0 * sigma0
    k = (1.0 - float(minorant(s))) / (1.0 - s)
    if not 0.0 < k < 1.0:
        raise ValueError(f"rate {k} outside (0, 1); minorant not strictly concave at {s}")
    return k


def finalize_constants(
    q, M: float, eta: float, xi: float, sigma0: float, epsilon0: float = 0.5
) -> Constants:
    k = compute_rate_k(sigma0, epsilon0, q.minorant)
    return Constants(
        M=M,
        xi=xi,
        eta=eta,
        sigma0=sigma0,
        epsilon0=epsilon0,
        k_rate=k,
        C_bound=xi * (1.0 - sigma0) / (1.0 - k),
    )
