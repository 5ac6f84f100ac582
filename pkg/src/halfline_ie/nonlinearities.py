"""Catalog of convex nonlinearities, their inverses and concavity minorants,
and the monotone perturbations with their envelopes."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import quad

from .exceptions import DivergenceError

__all__ = [
    "QSpec",
    "OmegaSpec",
    "OMEGA_BOUNDED",
    "OMEGA_SUBLINEAR",
    "make_power_q",
    "make_sqrt_family_q",
    "make_omega",
    "make_zero_omega",
    "inverse_by_bisection",
    "validate_q",
    "validate_omega",
    "q_from_config",
    "omega_from_config",
]

# perturbation classes: bounded by an integrable envelope mu(t) (quasilinear
# equation) vs. sublinear with omega(t, u) <= mu(t) * u (nonlinear equation)
OMEGA_BOUNDED = "omega1"
OMEGA_SUBLINEAR = "omega2"


@dataclass(frozen=True)
class QSpec:
    """Monotone convex nonlinearity with inverse and concavity minorant.

    ``eval_minorant`` is the concave increasing map m: [0,1] -> [0,1] with
    m(0)=0, m(1)=1 and inverse(s*u) >= m(s)*inverse(u); it drives the
    geometric convergence-rate bound.
    """

    label: str
    eval_q: Callable[[np.ndarray], np.ndarray]
    eval_inverse: Callable[[np.ndarray], np.ndarray]
    eval_minorant: Callable[[np.ndarray], np.ndarray]
    params: dict = field(default_factory=dict)

    def q(self, u):
        return self.eval_q(np.asarray(u, dtype=float))

    def inverse(self, u):
        return self.eval_inverse(np.asarray(u, dtype=float))

    def minorant(self, s):
        return self.eval_minorant(np.asarray(s, dtype=float))


@dataclass(frozen=True)
class OmegaSpec:
    """Perturbation omega(t, u) with envelope mu(t) and its class marker."""

    label: str
    eval_omega: Callable[[np.ndarray, np.ndarray], np.ndarray]
    eval_envelope: Callable[[np.ndarray], np.ndarray]
    kind: str
    params: dict = field(default_factory=dict)

    def omega(self, t, u):
        return self.eval_omega(np.asarray(t, dtype=float), np.asarray(u, dtype=float))

    def envelope(self, t):
        return self.eval_envelope(np.asarray(t, dtype=float))


def make_power_q(p: float) -> QSpec:
    """Q(u) = u**p with p > 1; inverse u**(1/p), minorant s**(1/p)."""
    if not p > 1.0:
        raise ValueError("p must exceed 1")
    alpha = 1.0 / p
    return QSpec(
        label="power",
        eval_q=lambda u: np.power(u, p),
        eval_inverse=lambda u: np.power(u, alpha),
        eval_minorant=lambda s: np.power(s, alpha),
        params={"p": p},
    )


def make_sqrt_family_q(p: float) -> QSpec:
    """Q(u) = ((sqrt(8u+1)-1)/2)**(2p) with p > 3/2.

    The inverse has the closed form (u**a + u**(a/2))/2 with a = 1/p, and
    s**a is a valid concavity minorant for it.
    """
    if not p > 1.5:
        raise ValueError("p must exceed 3/2")
    alpha = 1.0 / p

    def _q(u):
        return np.power((np.sqrt(8.0 * u + 1.0) - 1.0) / 2.0, 2.0 * p)

    def _inv(u):
        return 0.5 * (np.power(u, alpha) + np.power(u, alpha / 2.0))

    return QSpec(
        label="sqrt",
        eval_q=_q,
        eval_inverse=_inv,
        eval_minorant=lambda s: np.power(s, alpha),
        params={"p": p},
    )


def inverse_by_bisection(q_fn, u, steps: int = 80):
    """Invert a strictly increasing map with Q(0) = 0 by bracketed bisection.

    The upper bracket grows geometrically until it covers the target; no
    derivative is needed.  Vectorized over the target array.
    """
    u = np.asarray(u, dtype=float)
    hi = np.maximum(np.ones_like(u), u)
    for _ in range(200):
        short = np.asarray(q_fn(hi)) < u
        if not np.any(short):
            break
        hi = np.where(short, 2.0 * hi, hi)
    lo = np.zeros_like(u)
    for _ in range(steps):
        mid = 0.5 * (lo + hi)
        below = np.asarray(q_fn(mid)) < u
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    return 0.5 * (lo + hi)


_OMEGA_CATALOG: dict[str, Callable[[], OmegaSpec]] = {}


def _register_omega(name):
    def deco(fn):
        _OMEGA_CATALOG[name] = fn
        return fn

    return deco


@_register_omega("O1")
def _omega_1() -> OmegaSpec:
    return OmegaSpec(
        label="O1",
        eval_omega=lambda t, u: np.exp(-t) * u / (u + 1.0),
        eval_envelope=lambda t: np.exp(-t),
        kind=OMEGA_BOUNDED,
    )


@_register_omega("O2")
def _omega_2() -> OmegaSpec:
    return OmegaSpec(
        label="O2",
        eval_omega=lambda t, u: (1.0 - np.exp(-u)) / (1.0 + np.power(t, 3)),
        eval_envelope=lambda t: 1.0 / (1.0 + np.power(t, 3)),
        kind=OMEGA_BOUNDED,
    )


@_register_omega("O3")
def _omega_3() -> OmegaSpec:
    return OmegaSpec(
        label="O3",
        eval_omega=lambda t, u: np.exp(-np.square(t)) * (1.0 - np.exp(-u)),
        eval_envelope=lambda t: np.exp(-np.square(t)),
        kind=OMEGA_SUBLINEAR,
    )


@_register_omega("O4")
def _omega_4() -> OmegaSpec:
    return OmegaSpec(
        label="O4",
        eval_omega=lambda t, u: np.log1p(u) / (1.0 + np.square(t)),
        eval_envelope=lambda t: 1.0 / (1.0 + np.square(t)),
        kind=OMEGA_SUBLINEAR,
    )


def make_omega(name: str) -> OmegaSpec:
    if name not in _OMEGA_CATALOG:
        raise ValueError(f"unknown perturbation {name!r}; choose from {sorted(_OMEGA_CATALOG)}")
    return _OMEGA_CATALOG[name]()


def make_zero_omega(kind: str = OMEGA_SUBLINEAR) -> OmegaSpec:
    """Identically zero perturbation; degenerates either equation to its
    unperturbed form."""
    return OmegaSpec(
        label="zero",
        eval_omega=lambda t, u: np.zeros(np.broadcast(t, u).shape),
        eval_envelope=lambda t: np.zeros(np.shape(t)),
        kind=kind,
    )


@dataclass
class ValidationReport:
    label: str
    passed: bool
    failures: list[str] = field(default_factory=list)
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "passed": self.passed,
            "failures": list(self.failures),
            "details": dict(self.details),
        }


def validate_q(
    q: QSpec,
    M: float,
    xi_hint: float | None = None,
    probe_tol: float = 1e-6,
    inversion_tol: float = 1e-10,
    fd_step: float = 1e-3,
) -> ValidationReport:
    """Probe criticality, monotonicity, convexity, inverse consistency, the
    minorant inequality, and existence of the characteristic root."""
    failures: list[str] = []
    details: dict = {}

    crit = float(q.q(0.0))
    details["q_at_zero"] = crit
    if abs(crit) > 1e-14:
        failures.append("Q(0) != 0")

    # root of Q(u) = (1+M)u detected by a sign-change scan, independently of
    # the bisection-based solver
    us = np.geomspace(1e-6, 1e6, 2048)
    resid = q.q(us) - (1.0 + M) * us
    sign_change = np.any(np.diff(np.sign(resid)) != 0)
    details["char_root_found"] = bool(sign_change)
    if not sign_change:
        failures.append("no positive root of Q(u) = (1+M)u")
        u_hi = 4.0
    else:
        idx = int(np.argmax(np.diff(np.sign(resid)) != 0))
        u_hi = (1.0 + M) * us[idx + 1]
    if xi_hint is not None:
        u_hi = (1.0 + M) * xi_hint

    grid = np.linspace(fd_step, max(u_hi, 4.0), 512)
    qv = q.q(grid)
    if np.any(np.diff(qv) < -probe_tol):
        failures.append("Q not monotone nondecreasing on probe grid")
    second = q.q(grid + fd_step) - 2.0 * qv + q.q(grid - fd_step)
    if np.any(second < -probe_tol * fd_step):
        failures.append("Q not convex on probe grid")

    uu = np.linspace(0.0, 4.0, 256)
    inv_defect = float(np.max(np.abs(q.q(q.inverse(uu)) - uu)))
    details["inversion_defect"] = inv_defect
    if inv_defect > inversion_tol:
        failures.append(f"inverse defect {inv_defect:.3e} exceeds {inversion_tol:.1e}")

    ss = np.linspace(0.0, 1.0, 257)
    mv = q.minorant(ss)
    if abs(mv[0]) > 1e-12 or abs(mv[-1] - 1.0) > 1e-12:
        failures.append("minorant endpoints differ from 0 and 1")
    if np.any(np.diff(mv) < -probe_tol):
        failures.append("minorant not increasing")
    if np.any(np.diff(mv, 2) > probe_tol):
        failures.append("minorant not concave")

    sig = np.linspace(0.01, 0.99, 33)
    uval = np.linspace(u_hi / 64.0, u_hi * (1.0 - 1e-9), 65)
    lhs = q.inverse(sig[:, None] * uval[None, :])
    rhs = q.minorant(sig)[:, None] * q.inverse(uval)[None, :]
    minorant_defect = float(np.max(rhs - lhs))
    details["minorant_defect"] = minorant_defect
    if minorant_defect > probe_tol:
        failures.append(f"minorant inequality violated by {minorant_defect:.3e}")

    return ValidationReport(label=q.label, passed=not failures, failures=failures, details=details)


def _stabilized_integral(fn, rel_tol: float = 1e-3, x_cap: float = 1e7) -> float:
    x_hi = 16.0
    total, _ = quad(fn, 0.0, x_hi, limit=200)
    while True:
        piece, _ = quad(fn, x_hi, 2.0 * x_hi, limit=200)
        if abs(piece) <= rel_tol * max(abs(total + piece), 1e-300):
            return total + piece
        total += piece
        x_hi *= 2.0
        if x_hi > x_cap:
            raise DivergenceError("envelope integral failed to stabilize")


def validate_omega(w: OmegaSpec, probe_tol: float = 1e-6) -> ValidationReport:
    """Probe criticality, monotonicity in u, the envelope inequality, envelope
    decay, and (for the sublinear class) concavity in u."""
    failures: list[str] = []
    details: dict = {}

    ts = np.linspace(0.0, 20.0, 64)
    us = np.linspace(0.0, 50.0, 256)

    crit = float(np.max(np.abs(w.omega(ts, np.zeros_like(ts)))))
    details["criticality_defect"] = crit
    if crit > 1e-14:
        failures.append("omega(t, 0) != 0")

    vals = w.omega(ts[:, None], us[None, :])
    if np.any(np.diff(vals, axis=1) < -probe_tol):
        failures.append("omega not monotone in u")

    mu = w.envelope(ts)
    if w.kind == OMEGA_SUBLINEAR:
        if np.any(np.diff(vals, 2, axis=1) > probe_tol):
            failures.append("omega not concave in u")
        envelope_defect = float(np.max(vals - mu[:, None] * us[None, :]))
        details["envelope_defect"] = envelope_defect
        if envelope_defect > probe_tol:
            failures.append("omega(t, u) <= mu(t) u violated")
        if np.any(mu <= 0.0):
            failures.append("envelope not strictly positive on probe grid")
        try:
            details["envelope_integral"] = _stabilized_integral(
                lambda t: float(w.envelope(np.asarray(t)))
            )
        except DivergenceError:
            failures.append("envelope integral diverges")
    else:
        envelope_defect = float(np.max(vals - mu[:, None]))
        details["envelope_defect"] = envelope_defect
        if envelope_defect > probe_tol:
            failures.append("omega(t, u) <= mu(t) violated")
        far = float(w.envelope(np.asarray(1e6)))
        details["envelope_at_infinity"] = far
        if far > probe_tol:
            failures.append("envelope does not vanish at infinity")
        try:
            details["envelope_first_moment"] = _stabilized_integral(
                lambda t: t * float(w.envelope(np.asarray(t)))
            )
        except DivergenceError:
            failures.append("envelope first moment diverges")

    return ValidationReport(label=w.label, passed=not failures, failures=failures, details=details)


def q_from_config(cfg: dict) -> QSpec:
    family = cfg.get("family")
    p = cfg.get("p")
    if family == "power":
        return make_power_q(float(p))
    if family == "sqrt":
        return make_sqrt_family_q(float(p))
    raise ValueError(f"unknown Q family {family!r}; choose 'power' or 'sqrt'")


def omega_from_config(cfg: dict) -> OmegaSpec:
    return make_omega(cfg.get("name"))
