"""Solver for the essentially nonlinear equation: the unknown passes through a
convex increasing nonlinearity on the left-hand side and the solution is
bounded, vanishing at 0 and tending to the fixed-point level eta at infinity.

The construction runs three Picard schemes that share one operator workspace:
a lower auxiliary solution (unperturbed equation), an upper auxiliary solution
(envelope-weighted equation, started from the a-priori bound xi), and the main
scheme started from the upper solution, which decreases monotonically into the
sandwich between the two.

Beyond the truncation point every iterate is extended by a constant: its edge
value with the perturbation (or the envelope weight) frozen at the edge.
Freezing the decreasing envelope overestimates the dropped tail, which keeps
the upper solution a majorant of the main scheme on the discrete level.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .constants import Constants, compute_M, compute_eta, compute_xi, finalize_constants
from .diagnostics import IterationTrace, StoppingCriteria
from .exceptions import DivergenceError, IterationLimitError, UniquenessError
from .kernels import KernelSpec
from .nonlinearities import OMEGA_SUBLINEAR, OmegaSpec, QSpec
from .quadrature import (
    Grid,
    Profile,
    TailModel,
    apply_sum_difference,
    apply_weighted_sum_difference,
    derivative_moment,
)

__all__ = [
    "NonlinearProblem",
    "NonlinearSolution",
    "solve_lower_auxiliary",
    "solve_upper_auxiliary",
    "solve_nonlinear",
    "perturbation_envelope_ratio",
    "cross_start_check",
    "moment_tail_check",
]

DEFAULT_STOP = StoppingCriteria(tol=1e-10, max_iter=300)
_RATIO_DEN_FLOOR = 1e-14


@dataclass
class NonlinearProblem:
    kernel: KernelSpec
    q: QSpec
    omega2: OmegaSpec
    grid: Grid
    epsilon0: float = 0.5
    stop: StoppingCriteria = field(default_factory=lambda: DEFAULT_STOP)

    def __post_init__(self):
        if self.omega2.kind != OMEGA_SUBLINEAR:
            raise ValueError("nonlinear solver needs a sublinear-envelope perturbation")


@dataclass
class NonlinearSolution:
    B: Profile
    F: Profile
    Phi: Profile
    chi: Profile
    trace: IterationTrace
    constants: Constants
    eta_gap_l1: float
    sandwich_ok: bool


def _picard_decreasing(step, start: np.ndarray, stop: StoppingCriteria, what: str,
                       residual_fn=None) -> tuple[np.ndarray, IterationTrace]:
    trace = IterationTrace()
    cur = start
    for _ in range(stop.max_iter):
        new = step(cur)
        if not np.all(np.isfinite(new)):
            raise DivergenceError(f"{what}: non-finite iterate")
        delta = float(np.max(np.abs(new - cur)))
        trace.monotone_defect = max(trace.monotone_defect, float(np.max(new - cur)))
        res = delta if residual_fn is None else residual_fn(cur)
        trace.record(delta, res)
        cur = new
        if delta < stop.tol:
            trace.converged = True
            return cur, trace
    if stop.raise_on_cap:
        raise IterationLimitError(f"{what}: no convergence within {stop.max_iter} iterations")
    return cur, trace


def solve_lower_auxiliary(
    kernel: KernelSpec, q: QSpec, grid: Grid, eta: float,
    stop: StoppingCriteria = DEFAULT_STOP,
) -> tuple[Profile, IterationTrace]:
    """Unperturbed equation Q(F) = SD(F), iterated from the constant level eta.

    Iterates decrease monotonically to a nondecreasing profile with F(0) = 0
    and limit eta.
    """

    def step(cur):
        tail = TailModel.constant(float(cur[-1]))
        rhs = apply_sum_difference(kernel, Profile(grid, cur), tail).values
        return q.inverse(np.clip(rhs, 0.0, None))

    values, trace = _picard_decreasing(step, np.full(len(grid), eta), stop, "lower-auxiliary")
    return Profile(grid=grid, values=values, meta={"equation": "lower-auxiliary"}), trace


def solve_upper_auxiliary(
    kernel: KernelSpec, q: QSpec, omega2: OmegaSpec, grid: Grid, xi: float,
    stop: StoppingCriteria = DEFAULT_STOP,
) -> tuple[Profile, IterationTrace]:
    """Envelope-weighted equation Q(Phi) = SD((1 + mu2) Phi), from the constant
    a-priori bound xi."""
    mult = 1.0 + omega2.envelope(grid.nodes)
    mult_edge = float(mult[-1])

    def step(cur):
        tail = TailModel.constant(mult_edge * float(cur[-1]))
        rhs = apply_weighted_sum_difference(kernel, Profile(grid, cur), mult, tail).values
        return q.inverse(np.clip(rhs, 0.0, None))

    values, trace = _picard_decreasing(step, np.full(len(grid), xi), stop, "upper-auxiliary")
    return Profile(grid=grid, values=values, meta={"equation": "upper-auxiliary"}), trace


def _main_step(kernel, q, omega2, grid):
    L = grid.x_max

    def step(cur):
        src = cur + omega2.omega(grid.nodes, cur)
        tail = TailModel.constant(float(cur[-1]) + float(omega2.omega(L, cur[-1])))
        rhs = apply_sum_difference(kernel, Profile(grid, src), tail).values
        return q.inverse(np.clip(rhs, 0.0, None))

    def q_residual(cur):
        src = cur + omega2.omega(grid.nodes, cur)
        tail = TailModel.constant(float(cur[-1]) + float(omega2.omega(L, cur[-1])))
        rhs = apply_sum_difference(kernel, Profile(grid, src), tail).values
        return float(np.max(np.abs(q.q(cur) - rhs)))

    return step, q_residual


def perturbation_envelope_ratio(
    kernel: KernelSpec, q: QSpec, omega2: OmegaSpec, phi: Profile,
    both_readings: bool = False,
):
    """Node-wise ratio of the perturbed operator output to its envelope-weighted
    counterpart, evaluated on the upper auxiliary solution.

    Both integrals vanish at x = 0, where the ratio takes its derivative-based
    limit: the quotient of the K'-weighted moments of the two integrands.  The
    ratio lies in (0, 1] and tends to 1 at infinity; its infimum seeds the
    geometric rate bound.

    With ``both_readings`` the alternative grouping of the denominator weight,
    1 + mu2(t)*Phi(t) applied additively instead of multiplicatively, is
    returned as well for diagnostic comparison.
    """
    grid = phi.grid
    x = grid.nodes
    mu = omega2.envelope(x)
    perturbed = phi.values + omega2.omega(x, phi.values)
    edge = float(phi.values[-1])

    num = apply_sum_difference(
        kernel, Profile(grid, perturbed), TailModel.constant(perturbed[-1])
    ).values
    den = apply_weighted_sum_difference(
        kernel, phi, 1.0 + mu, TailModel.constant((1.0 + float(mu[-1])) * edge)
    ).values

    interior = np.abs(den[1:]) < _RATIO_DEN_FLOOR
    if np.any(interior):
        raise DivergenceError("ratio denominator vanishes at an interior node; grid too coarse")

    values = np.empty_like(num)
    values[1:] = num[1:] / den[1:]
    # L'Hopital-style limit at the origin from K'-weighted moments
    num0 = -derivative_moment(kernel, grid, perturbed)
    den0 = -derivative_moment(kernel, grid, (1.0 + mu) * phi.values)
    values[0] = num0 / den0
    ratio = Profile(grid=grid, values=values, meta={"diagnostic": "perturbation-envelope-ratio"})
    if not both_readings:
        return ratio

    den_alt = apply_weighted_sum_difference(
        kernel, Profile(grid, np.ones_like(x)), 1.0 + mu * phi.values, TailModel.constant(1.0)
    ).values
    alt = np.empty_like(num)
    alt[1:] = num[1:] / den_alt[1:]
    alt[0] = num0 / -derivative_moment(kernel, grid, 1.0 + mu * phi.values)
    return ratio, Profile(grid=grid, values=alt, meta={"diagnostic": "ratio-additive-reading"})


def solve_nonlinear(problem: NonlinearProblem) -> NonlinearSolution:
    """Run the full constructive scheme and bundle solution plus diagnostics."""
    kernel, q, w, grid = problem.kernel, problem.q, problem.omega2, problem.grid
    M = compute_M(kernel, w)
    eta = compute_eta(q)
    xi = compute_xi(q, M)

    F, _ = solve_lower_auxiliary(kernel, q, grid, eta, problem.stop)
    Phi, _ = solve_upper_auxiliary(kernel, q, w, grid, xi, problem.stop)

    step, q_residual = _main_step(kernel, q, w, grid)
    values, trace = _picard_decreasing(
        step, Phi.values.copy(), problem.stop, "main-scheme", residual_fn=q_residual
    )
    B = Profile(grid=grid, values=values, meta={"equation": "main"})

    chi = perturbation_envelope_ratio(kernel, q, w, Phi)
    sigma0 = float(np.clip(np.min(chi.values), 1e-6, 1.0 - 1e-9))
    constants = finalize_constants(q, M, eta, xi, sigma0, problem.epsilon0)

    tol = 10.0 * problem.stop.tol
    sandwich_ok = bool(
        np.all(F.values <= B.values + tol) and np.all(B.values <= Phi.values + tol)
    )
    if not sandwich_ok:
        raise DivergenceError("sandwich bounds violated beyond tolerance; check quadrature setup")

    gap = np.abs(eta - B.values)
    eta_gap_l1 = float(np.trapezoid(gap, grid.nodes))

    return NonlinearSolution(
        B=B, F=F, Phi=Phi, chi=chi, trace=trace, constants=constants,
        eta_gap_l1=eta_gap_l1, sandwich_ok=sandwich_ok,
    )


def cross_start_check(
    problem: NonlinearProblem, solution: NonlinearSolution, tol: float = 1e-4
) -> dict:
    """Re-run the main Picard scheme from alternative admissible starts and
    compare against the constructed solution.

    Starts with a positive infimum at infinity must reproduce the same profile;
    the zero start stays at the trivial solution and is reported, not compared.
    """
    kernel, q, w, grid = problem.kernel, problem.q, problem.omega2, problem.grid
    step, _ = _main_step(kernel, q, w, grid)
    xi = solution.constants.xi
    starts = {
        "constant-xi": np.full(len(grid), xi),
        "max-lower-half-upper": np.maximum(solution.F.values, 0.5 * solution.Phi.values),
    }
    report: dict = {"tolerance": tol, "starts": {}}
    for name, start in starts.items():
        values, trace = _picard_decreasing(
            step, start, problem.stop, f"cross-start[{name}]"
        )
        dist = float(np.max(np.abs(values - solution.B.values)))
        report["starts"][name] = {"sup_distance": dist, "iterations": trace.iterations}
        if dist > tol:
            raise UniquenessError(
                f"start {name!r} converged {dist:.3e} away from the reference solution"
            )

    zero, _ = _picard_decreasing(step, np.zeros(len(grid)), problem.stop, "cross-start[zero]")
    trivial = float(np.max(np.abs(zero)))
    report["starts"]["zero"] = {
        "sup_norm": trivial,
        "stays_trivial": trivial <= problem.stop.tol,
    }
    return report


def moment_tail_check(solution: NonlinearSolution, p_order: int) -> dict:
    """Truncated weighted gap integrals int_0^X x^(p-1) |eta - B| dx at growing
    truncations, with the relative change over the last extension."""
    if p_order < 1:
        raise ValueError("p_order must be a positive integer")
    grid = solution.B.grid
    x = grid.nodes
    eta = solution.constants.eta
    integrand = np.power(x, p_order - 1) * np.abs(eta - solution.B.values)
    results = {}
    for frac in (0.5, 0.75, 1.0):
        cut = int(np.searchsorted(x, frac * grid.x_max, side="right"))
        results[f"{frac:g}"] = float(np.trapezoid(integrand[:cut], x[:cut]))
    full, prev = results["1"], results["0.75"]
    rel_change = abs(full - prev) / max(abs(full), 1e-300)
    return {
        "p_order": p_order,
        "truncated_integrals": results,
        "final_relative_change": rel_change,
        "stabilized": rel_change < 0.01,
    }
