"""Catalog of even, positive, normalized kernels and their condition validators.

A conforming kernel is even, strictly positive, continuously differentiable,
nonincreasing on the positive half-line, integrates to 1/2 over [0, inf) and
has a finite first moment.  Evenness is enforced structurally: every evaluator
is applied to |x|, so K(-x) == K(x) holds exactly in floating point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import CubicSpline

from .exceptions import DivergenceError

__all__ = [
    "KernelSpec",
    "KernelValidationReport",
    "make_gaussian_kernel",
    "make_quartic_kernel",
    "kernel_from_config",
    "kernel_cdf",
    "validate_kernel",
]

_SQRT_PI = math.sqrt(math.pi)
_SQRT2_OVER_PI = math.sqrt(2.0) / math.pi


def _cumulative_simpson(y: np.ndarray, h: float) -> np.ndarray:
    """Cumulative integral of uniformly sampled values, fourth order.

    Even-index nodes accumulate composite Simpson panels; odd-index nodes use
    the three-point half-panel rule.  Requires an odd number of samples.
    """
    if len(y) % 2 == 0:
        raise ValueError("cumulative Simpson needs an odd sample count")
    out = np.zeros_like(y)
    out[2::2] = np.cumsum(h / 3.0 * (y[:-2:2] + 4.0 * y[1:-1:2] + y[2::2]))
    out[1::2] = out[0:-1:2] + h / 12.0 * (5.0 * y[0:-1:2] + 8.0 * y[1::2] - y[2::2])
    return out


@dataclass(frozen=True)
class KernelSpec:
    """An even positive kernel with cached cumulative integrals.

    ``eval_fn`` and ``deriv_fn`` are defined for nonnegative arguments; the
    public evaluators extend them evenly (respectively oddly).  ``tail_mass_fn``
    and ``tail_first_moment_fn`` give the analytic remainders int_z^inf K and
    int_z^inf y K(y) dy for z >= 0; they keep tail corrections free of the
    cancellation that 0.5 - cumulative would suffer at machine precision.
    """

    label: str
    eval_fn: Callable[[np.ndarray], np.ndarray]
    deriv_fn: Callable[[np.ndarray], np.ndarray]
    params: dict = field(default_factory=dict)
    tail_mass_fn: Callable[[np.ndarray], np.ndarray] | None = None
    tail_first_moment_fn: Callable[[np.ndarray], np.ndarray] | None = None
    cdf_span: float = 40.0
    default_x_max: float = 12.0
    default_nodes: int = 1201

    def __call__(self, x):
        return self.eval_fn(np.abs(np.asarray(x, dtype=float)))

    def deriv(self, x):
        """K'(x), extended oddly from the positive half-line."""
        x = np.asarray(x, dtype=float)
        return np.sign(x) * self.deriv_fn(np.abs(x))

    def cache_key(self) -> tuple:
        return (self.label, tuple(sorted(self.params.items())))

    @cached_property
    def _half_spline(self) -> CubicSpline:
        n_fine = 32769
        xs = np.linspace(0.0, self.cdf_span, n_fine)
        vals = _cumulative_simpson(self.eval_fn(xs), xs[1] - xs[0])
        return CubicSpline(xs, vals)

    @cached_property
    def _moment_spline(self) -> CubicSpline:
        n_fine = 32769
        xs = np.linspace(0.0, self.cdf_span, n_fine)
        vals = _cumulative_simpson(xs * self.eval_fn(xs), xs[1] - xs[0])
        return CubicSpline(xs, vals)

    def half_integral(self, x):
        """int_0^x K(y) dy for x >= 0."""
        x = np.asarray(x, dtype=float)
        inside = np.clip(x, 0.0, self.cdf_span)
        res = self._half_spline(inside)
        beyond = x > self.cdf_span
        if np.any(beyond):
            res = np.where(beyond, 0.5 - self.tail_mass(np.maximum(x, self.cdf_span)), res)
        return res

    def tail_mass(self, z):
        """int_z^inf K(y) dy for any real z."""
        z = np.asarray(z, dtype=float)
        if self.tail_mass_fn is not None:
            pos = self.tail_mass_fn(np.abs(z))
        else:
            pos = 0.5 - self._half_spline(np.clip(np.abs(z), 0.0, self.cdf_span))
        return np.where(z >= 0.0, pos, 1.0 - pos)

    def tail_first_moment(self, z):
        """int_z^inf y K(y) dy for z >= 0."""
        z = np.asarray(z, dtype=float)
        if self.tail_first_moment_fn is not None:
            return self.tail_first_moment_fn(z)
        total = self.first_moment_half()
        return total - self._moment_spline(np.clip(z, 0.0, self.cdf_span))

    def first_moment_half(self) -> float:
        """int_0^inf y K(y) dy."""
        if self.tail_first_moment_fn is not None:
            return float(self.tail_first_moment_fn(np.asarray(0.0)))
        val, _ = quad(lambda y: y * self.eval_fn(np.asarray(y)), 0.0, np.inf, limit=200)
        return val

    def cdf(self, x):
        """int_{-inf}^x K(y) dy."""
        x = np.asarray(x, dtype=float)
        return np.where(x >= 0.0, 1.0 - self.tail_mass(np.abs(x)), self.tail_mass(np.abs(x)))


@dataclass
class KernelValidationReport:
    half_integral: float
    sup_value: float
    first_moment: float
    evenness_defect: float
    monotonicity_violations: int
    passed: bool
    failures: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "half_integral": self.half_integral,
            "sup_value": self.sup_value,
            "first_moment": self.first_moment,
            "evenness_defect": self.evenness_defect,
            "monotonicity_violations": self.monotonicity_violations,
            "passed": self.passed,
            "failures": list(self.failures),
        }


def make_gaussian_kernel() -> KernelSpec:
    """K(x) = exp(-x^2)/sqrt(pi): Gaussian decay, all moments finite."""
    from scipy.special import erfc

    def _eval(y):
        return np.exp(-np.square(y)) / _SQRT_PI

    def _deriv(y):
        return -2.0 * y * np.exp(-np.square(y)) / _SQRT_PI

    return KernelSpec(
        label="gaussian",
        eval_fn=_eval,
        deriv_fn=_deriv,
        tail_mass_fn=lambda z: 0.5 * erfc(z),
        tail_first_moment_fn=lambda z: np.exp(-np.square(z)) / (2.0 * _SQRT_PI),
        cdf_span=12.0,
        default_x_max=12.0,
        default_nodes=1201,
    )


def _quartic_antiderivative(y):
    # int_0^y dv/(1+v^4), valid for y >= 0
    y = np.asarray(y, dtype=float)
    r2 = math.sqrt(2.0)
    log_term = np.log((y * y + r2 * y + 1.0) / (y * y - r2 * y + 1.0)) / (4.0 * r2)
    atan_term = (np.arctan(r2 * y + 1.0) + np.arctan(r2 * y - 1.0)) / (2.0 * r2)
    return log_term + atan_term


def make_quartic_kernel() -> KernelSpec:
    """K(x) = (sqrt(2)/pi)/(1 + x^4): cubic-tail cumulative, slow decay."""

    def _eval(y):
        return _SQRT2_OVER_PI / (1.0 + np.power(y, 4))

    def _deriv(y):
        return -_SQRT2_OVER_PI * 4.0 * np.power(y, 3) / np.square(1.0 + np.power(y, 4))

    def _tail(z):
        return 0.5 - _SQRT2_OVER_PI * _quartic_antiderivative(z)

    def _tail_moment(z):
        # int_z^inf y K dy with int y/(1+y^4) dy = arctan(y^2)/2
        z = np.asarray(z, dtype=float)
        return _SQRT2_OVER_PI * 0.5 * (math.pi / 2.0 - np.arctan(np.square(z)))

    return KernelSpec(
        label="quartic",
        eval_fn=_eval,
        deriv_fn=_deriv,
        tail_mass_fn=_tail,
        tail_first_moment_fn=_tail_moment,
        cdf_span=120.0,
        default_x_max=40.0,
        default_nodes=2001,
    )


_KERNEL_FAMILIES = {
    "gaussian": make_gaussian_kernel,
    "quartic": make_quartic_kernel,
}


def kernel_from_config(cfg: dict) -> KernelSpec:
    family = cfg.get("family")
    if family not in _KERNEL_FAMILIES:
        raise ValueError(f"unknown kernel family {family!r}; choose from {sorted(_KERNEL_FAMILIES)}")
    return _KERNEL_FAMILIES[family]()


def kernel_cdf(kernel: KernelSpec, x: float) -> float:
    """Cumulative mass int_{-inf}^x K; accepts +-inf sentinels."""
    if math.isinf(x):
        return 1.0 if x > 0 else 0.0
    return float(kernel.cdf(np.asarray(x)))


def _stabilized_moment(fn, x0: float = 16.0, rel_tol: float = 1e-3, x_cap: float = 1e7) -> float:
    """Integrate fn over [0, inf) by domain doubling until the value settles."""
    x_hi = x0
    total, _ = quad(fn, 0.0, x_hi, limit=200)
    while True:
        piece, _ = quad(fn, x_hi, 2.0 * x_hi, limit=200)
        new_total = total + piece
        if abs(new_total - total) <= rel_tol * max(abs(new_total), 1e-300):
            return new_total
        total = new_total
        x_hi *= 2.0
        if x_hi > x_cap:
            raise DivergenceError("moment integral failed to stabilize under domain doubling")


def validate_kernel(
    kernel: KernelSpec,
    integral_tol: float = 1e-8,
    probe_tol: float = 1e-6,
    n_probe: int = 4096,
    probe_span: float | None = None,
) -> KernelValidationReport:
    """Numerically probe positivity, evenness, normalization, monotone decay
    and first-moment finiteness.  Failures are recorded, not raised."""
    failures: list[str] = []
    span = probe_span if probe_span is not None else kernel.default_x_max
    xs = np.linspace(0.0, span, n_probe)
    vals = kernel(xs)

    half, _ = quad(lambda y: float(kernel(np.asarray(y))), 0.0, np.inf, limit=200)
    if abs(half - 0.5) > integral_tol:
        failures.append(f"half-line integral {half:.3e} differs from 0.5")

    sup_value = float(vals[0])
    if np.any(vals <= 0.0):
        failures.append("kernel not strictly positive on probe grid")
    if np.any(vals > sup_value + probe_tol):
        failures.append("sup not attained at 0 on probe grid")

    diffs = np.diff(vals)
    mono_viol = int(np.count_nonzero(diffs > probe_tol))
    if mono_viol:
        failures.append(f"{mono_viol} monotonicity violations on probe grid")

    deriv_interior = kernel.deriv(xs[1:])
    if np.any(deriv_interior >= probe_tol):
        failures.append("derivative not negative on positive probe grid")

    evenness_defect = float(np.max(np.abs(kernel(xs) - kernel(-xs))))
    if evenness_defect > 0.0:
        failures.append("evenness defect nonzero")

    try:
        first_moment = _stabilized_moment(lambda y: y * float(kernel(np.asarray(y))))
    except DivergenceError:
        first_moment = math.inf
        failures.append("first moment does not stabilize under domain doubling")

    return KernelValidationReport(
        half_integral=half,
        sup_value=sup_value,
        first_moment=first_moment,
        evenness_defect=evenness_defect,
        monotonicity_violations=mono_viol,
        passed=not failures,
        failures=failures,
    )
