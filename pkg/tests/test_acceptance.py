"""Acceptance gate: the full criteria catalog at production grid sizes.

Each criterion prints one PASS/FAIL line (with its wall time) with capture
disabled so the verdicts always reach the terminal.
"""

import sys
import time

import numpy as np
import pytest

from halfline_ie import (
    NonlinearProblem,
    Profile,
    QuasilinearProblem,
    TailModel,
    apply_sum_difference,
    build_grid,
    cross_start_check,
    fit_geometric_rate,
    make_gaussian_kernel,
    make_omega,
    make_power_q,
    make_quartic_kernel,
    make_zero_omega,
    moment_tail_check,
    perturbation_envelope_ratio,
    solve_nonlinear,
    solve_quasilinear,
)
from halfline_ie.nonlinearities import OMEGA_BOUNDED, OMEGA_SUBLINEAR, OmegaSpec


class _Verdict:
    def __init__(self, number, name, budget_s=None, capfd=None):
        self.number = number
        self.name = name
        self.budget_s = budget_s
        self.capfd = capfd

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc, tb):
        elapsed = time.perf_counter() - self.t0
        ok = exc_type is None and (self.budget_s is None or elapsed <= self.budget_s)
        verdict = "PASS" if ok else "FAIL"
        line = f"ACCEPTANCE {self.number:02d} {self.name}: {verdict} ({elapsed:.2f}s)"
        if self.capfd is not None:
            with self.capfd.disabled():
                print(line, file=sys.stderr, flush=True)
        else:
            print(line, file=sys.__stdout__, flush=True)
        if exc_type is None and self.budget_s is not None and elapsed > self.budget_s:
            pytest.fail(f"criterion {self.number} exceeded {self.budget_s}s budget: {elapsed:.2f}s")
        return False


@pytest.fixture(scope="module")
def k1():
    return make_gaussian_kernel()


@pytest.fixture(scope="module")
def k2():
    return make_quartic_kernel()


@pytest.fixture(scope="module")
def grid_k1(k1):
    return build_grid(k1.default_x_max, k1.default_nodes)


@pytest.fixture(scope="module")
def grid_k2(k2):
    return build_grid(k2.default_x_max, k2.default_nodes)


@pytest.fixture(scope="module")
def nl_default(k1, grid_k1):
    problem = NonlinearProblem(
        kernel=k1, q=make_power_q(2.0), omega2=make_omega("O3"), grid=grid_k1
    )
    return problem, solve_nonlinear(problem)


@pytest.fixture(scope="module")
def nl_quartic(k2, grid_k2):
    problem = NonlinearProblem(
        kernel=k2, q=make_power_q(2.0), omega2=make_omega("O4"), grid=grid_k2
    )
    return problem, solve_nonlinear(problem)


def test_01_kernel_normalization(k1, k2, capfd):
    with _Verdict(1, "kernel-normalization-and-moment-stability", budget_s=1.0, capfd=capfd):
        for kernel in (k1, k2):
            assert kernel.tail_mass(0.0) == pytest.approx(0.5, abs=1e-8)
            span = kernel.default_x_max
            m_x = kernel.first_moment_half() - kernel.tail_first_moment(span)
            m_2x = kernel.first_moment_half() - kernel.tail_first_moment(2.0 * span)
            assert abs(m_2x - m_x) / m_2x < 1e-3


def test_02_operator_identity(k1, grid_k1, capfd):
    with _Verdict(2, "operator-maps-identity-to-identity", budget_s=5.0, capfd=capfd):
        out = apply_sum_difference(
            k1, Profile(grid_k1, grid_k1.nodes.copy()), TailModel.linear(1.0, 0.0)
        )
        cut = int(np.searchsorted(grid_k1.nodes, 0.8 * grid_k1.x_max))
        err = float(np.max(np.abs(out.values[: cut + 1] - grid_k1.nodes[: cut + 1])))
        assert err <= 5e-6


def test_03_quasilinear_family(k1, grid_k1, capfd):
    with _Verdict(3, "quasilinear-two-sided-bounds-and-slopes", budget_s=30.0, capfd=capfd):
        problem = QuasilinearProblem(
            kernel=k1, omega1=make_omega("O1"), grid=grid_k1, gammas=[0.5, 1.0, 2.0]
        )
        sols = solve_quasilinear(problem)
        x = grid_k1.nodes
        x_star = 0.8 * grid_k1.x_max
        for sol in sols:
            assert sol.trace.converged
            assert sol.trace.monotone_defect <= 1e-9
            assert np.all(sol.f.values >= sol.gamma * x - 1e-6)
            assert np.all(sol.f.values <= sol.gamma * x + sol.psi.values + 1e-6)
            assert abs(sol.slope_estimate - sol.gamma) <= sol.psi.sup_norm() / x_star + 1e-6
        for lo, hi in zip(sols, sols[1:]):
            assert np.all(hi.f.values - lo.f.values >= (hi.gamma - lo.gamma) * x - 1e-6)


def test_04_characteristic_constants(nl_default, capfd):
    with _Verdict(4, "characteristic-constants", budget_s=1.0, capfd=capfd):
        _, sol = nl_default
        assert sol.constants.M == pytest.approx(0.5, abs=1e-6)
        assert sol.constants.eta == pytest.approx(1.0, abs=1e-10)
        assert sol.constants.xi == pytest.approx(1.5, abs=1e-8)


def test_05_nonlinear_suite(nl_default, grid_k1, capfd):
    with _Verdict(5, "nonlinear-bounds-and-residual", budget_s=60.0, capfd=capfd):
        problem, sol = nl_default
        q, w = problem.q, problem.omega2
        x = grid_k1.nodes
        # replay the main scheme to check iterate-wise ordering against F
        cur = sol.Phi.values.copy()
        for _ in range(40):
            src = cur + w.omega(x, cur)
            tail = TailModel.constant(float(cur[-1]) + float(w.omega(grid_k1.x_max, cur[-1])))
            new = q.inverse(
                np.clip(apply_sum_difference(problem.kernel, Profile(grid_k1, src), tail).values, 0.0, None)
            )
            assert np.all(new <= cur + 1e-9)
            assert np.all(new >= sol.F.values - 1e-9)
            if np.max(np.abs(new - cur)) < problem.stop.tol:
                break
            cur = new
        assert np.all(sol.F.values <= sol.B.values + 1e-9)
        assert np.all(sol.B.values <= sol.Phi.values + 1e-9)
        assert abs(sol.B.values[0]) <= 1e-8
        assert np.all(sol.B.values < sol.constants.xi)
        i = int(np.searchsorted(x, 0.9 * grid_k1.x_max))
        assert abs(sol.B.values[i] - 1.0) <= 0.05
        assert sol.trace.residuals[-1] <= 1e-9


def test_06_ratio_profile(nl_default, k1, grid_k1, capfd):
    with _Verdict(6, "operator-ratio-profile", budget_s=30.0, capfd=capfd):
        problem, sol = nl_default
        chi = sol.chi.values
        assert np.all(chi > 0.0)
        assert np.all(chi <= 1.0 + 1e-6)
        i = int(np.searchsorted(grid_k1.nodes, 0.9 * grid_k1.x_max))
        assert chi[i] == pytest.approx(1.0, abs=0.02)
        saturated = OmegaSpec(
            label="saturated",
            eval_omega=lambda t, u: np.exp(-np.square(t)) * u,
            eval_envelope=lambda t: np.exp(-np.square(t)),
            kind=OMEGA_SUBLINEAR,
        )
        ratio = perturbation_envelope_ratio(k1, problem.q, saturated, sol.Phi)
        assert np.max(np.abs(ratio.values - 1.0)) <= 1e-8


def test_07_rate_envelope(nl_default, capfd):
    with _Verdict(7, "geometric-rate-envelope", budget_s=5.0, capfd=capfd):
        _, sol = nl_default
        rate = fit_geometric_rate(sol.trace)
        assert rate < 1.0
        c = sol.constants
        for n in range(3, len(sol.trace.sup_deltas)):
            bound = c.xi * (1.0 - c.sigma0) * c.k_rate ** (n + 1) * 1.1
            assert sol.trace.sup_deltas[n] <= bound


def test_08_degenerate_perturbations(k1, grid_k1, capfd):
    with _Verdict(8, "degenerate-perturbations", budget_s=60.0, capfd=capfd):
        problem = NonlinearProblem(
            kernel=k1, q=make_power_q(2.0), omega2=make_zero_omega(), grid=grid_k1
        )
        sol = solve_nonlinear(problem)
        assert np.max(np.abs(sol.B.values - sol.F.values)) <= 1e-8
        ql = QuasilinearProblem(
            kernel=k1, omega1=make_zero_omega(kind=OMEGA_BOUNDED), grid=grid_k1, gammas=[1.0]
        )
        (qsol,) = solve_quasilinear(ql)
        assert np.max(np.abs(qsol.f.values - grid_k1.nodes)) <= 5e-6


def test_09_uniqueness_cross_starts(nl_default, capfd):
    with _Verdict(9, "uniqueness-across-starts", budget_s=60.0, capfd=capfd):
        problem, sol = nl_default
        report = cross_start_check(problem, sol, tol=1e-4)
        for name in ("constant-xi", "max-lower-half-upper"):
            assert report["starts"][name]["sup_distance"] <= 1e-4
        assert report["starts"]["zero"]["stays_trivial"]


def test_10_moment_stabilization(nl_default, capfd):
    with _Verdict(10, "weighted-gap-moment-stabilization", budget_s=5.0, capfd=capfd):
        _, sol = nl_default
        for p_order in (1, 2):
            result = moment_tail_check(sol, p_order)
            assert result["final_relative_change"] < 0.01


def test_11_refinement_and_slow_kernel(nl_default, nl_quartic, k1, grid_k2, capfd):
    with _Verdict(11, "grid-refinement-and-slow-decay-kernel", budget_s=120.0, capfd=capfd):
        problem, sol = nl_default
        fine = build_grid(problem.grid.x_max, 2 * (len(problem.grid) - 1) + 1)
        fine_sol = solve_nonlinear(
            NonlinearProblem(kernel=k1, q=problem.q, omega2=problem.omega2, grid=fine)
        )
        # the doubled uniform grid contains the original nodes at even indices
        diff = float(np.max(np.abs(fine_sol.B.values[::2] - sol.B.values)))
        assert diff <= 1e-6
        _, qsol = nl_quartic
        assert np.all(qsol.F.values <= qsol.B.values + 1e-9)
        assert np.all(qsol.B.values <= qsol.Phi.values + 1e-9)
        assert abs(qsol.B.values[0]) <= 1e-8
        assert np.all(qsol.chi.values > 0.0)
        assert np.all(qsol.chi.values <= 1.0 + 1e-6)
        i = int(np.searchsorted(grid_k2.nodes, 0.9 * grid_k2.x_max))
        assert abs(qsol.B.values[i] - qsol.constants.eta) <= 0.1
        assert abs(qsol.chi.values[i] - 1.0) <= 0.1
