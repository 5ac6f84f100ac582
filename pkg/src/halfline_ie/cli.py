"""Command-line entry point: TOML configuration, subcommand dispatch, and
CSV/JSON file emission."""

from __future__ import annotations

import argparse
import datetime
import hashlib
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import constants as cc
from .diagnostics import ReportSection, compose_report, fit_geometric_rate, make_check
from .exceptions import ConfigError, HalflineError
from .kernels import kernel_from_config, validate_kernel
from .nonlinearities import (
    OMEGA_BOUNDED,
    OMEGA_SUBLINEAR,
    omega_from_config,
    q_from_config,
    validate_omega,
    validate_q,
)
from .nonlinear import NonlinearProblem, perturbation_envelope_ratio, solve_nonlinear
from .quadrature import SCHEME_GAUSS, SCHEME_SIMPSON, build_grid
from .quasilinear import QuasilinearProblem, solve_quasilinear

__all__ = ["RunConfig", "parse_config", "run_subcommand", "main"]

_KNOWN_TABLES = {"kernel", "Q", "omega", "grid", "quasilinear", "stop", "output"}
_KNOWN_KEYS = {
    "kernel": {"family"},
    "Q": {"family", "p"},
    "omega": {"name"},
    "grid": {"x_max", "n", "scheme"},
    "quasilinear": {"gammas"},
    "stop": {"tol", "max_iter"},
    "output": {"dir"},
}
_TOP_LEVEL_SCALARS = {"epsilon0"}


@dataclass
class RunConfig:
    kernel_cfg: dict
    q_cfg: dict | None
    omega_cfg: dict | None
    grid_cfg: dict
    gammas: list[float]
    epsilon0: float = 0.5
    stop_cfg: dict = field(default_factory=dict)
    out_dir: str = "out"
    raw: dict = field(default_factory=dict)

    def config_hash(self) -> str:
        canon = json.dumps(self.raw, sort_keys=True)
        return hashlib.sha256(canon.encode()).hexdigest()[:16]


def parse_config(path: str | Path) -> RunConfig:
    """Load and validate a TOML run configuration; unknown keys are rejected."""
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"TOML parse error in {path}: {exc}") from exc

    for key, val in data.items():
        if isinstance(val, dict):
            if key not in _KNOWN_TABLES:
                raise ConfigError(f"unknown config table [{key}]")
            unknown = set(val) - _KNOWN_KEYS[key]
            if unknown:
                raise ConfigError(f"unknown key(s) {sorted(unknown)} in table [{key}]")
        elif key not in _TOP_LEVEL_SCALARS:
            raise ConfigError(f"unknown top-level key {key!r}")

    kernel_cfg = data.get("kernel", {"family": "gaussian"})
    q_cfg = data.get("Q")
    omega_cfg = data.get("omega")

    # range checks surface here with the offending field name
    if q_cfg is not None:
        family, p = q_cfg.get("family"), q_cfg.get("p")
        if family == "power" and not (isinstance(p, (int, float)) and p > 1):
            raise ConfigError("Q.p must exceed 1 for the power family")
        if family == "sqrt" and not (isinstance(p, (int, float)) and p > 1.5):
            raise ConfigError("Q.p must exceed 3/2 for the sqrt family")

    # grid defaults follow the kernel's decay: the slow cubic tail needs a
    # wider truncation window
    kernel = kernel_from_config(kernel_cfg)
    grid_cfg = {
        "x_max": float(kernel.default_x_max),
        "n": int(kernel.default_nodes),
        "scheme": SCHEME_SIMPSON,
    }
    grid_cfg.update(data.get("grid", {}))
    if grid_cfg["scheme"] not in (SCHEME_SIMPSON, SCHEME_GAUSS):
        raise ConfigError(f"grid.scheme must be {SCHEME_SIMPSON!r} or {SCHEME_GAUSS!r}")
    if not grid_cfg["x_max"] > 0:
        raise ConfigError("grid.x_max must be positive")

    epsilon0 = float(data.get("epsilon0", 0.5))
    if not 0.0 < epsilon0 < 1.0:
        raise ConfigError("epsilon0 must lie in (0, 1)")

    gammas = [float(g) for g in data.get("quasilinear", {}).get("gammas", [1.0])]
    if any(g <= 0 for g in gammas):
        raise ConfigError("quasilinear.gammas must all be positive")

    return RunConfig(
        kernel_cfg=kernel_cfg,
        q_cfg=q_cfg,
        omega_cfg=omega_cfg,
        grid_cfg=grid_cfg,
        gammas=gammas,
        epsilon0=epsilon0,
        stop_cfg=data.get("stop", {}),
        out_dir=data.get("output", {}).get("dir", "out"),
        raw=data,
    )


def _write_csv(path: Path, columns: dict[str, np.ndarray]) -> None:
    names = list(columns)
    arrays = [np.asarray(columns[n], dtype=float) for n in names]
    with open(path, "w", newline="") as fh:
        fh.write(",".join(names) + "\n")
        for row in zip(*arrays):
            fh.write(",".join(format(v, ".17g") for v in row) + "\n")


def _provenance(cfg: RunConfig) -> dict:
    # the timestamp lives in this single field so golden-file tests can mask it
    return {
        "config": cfg.raw,
        "config_hash": cfg.config_hash(),
        "artifact_version": "0.1.0",
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
    }


def _build_components(cfg: RunConfig):
    kernel = kernel_from_config(cfg.kernel_cfg)
    q = q_from_config(cfg.q_cfg) if cfg.q_cfg else None
    omega = omega_from_config(cfg.omega_cfg) if cfg.omega_cfg else None
    grid = build_grid(cfg.grid_cfg["x_max"], cfg.grid_cfg["n"], cfg.grid_cfg["scheme"])
    return kernel, q, omega, grid


def _validation_sections(cfg: RunConfig, kernel, q, omega) -> list[ReportSection]:
    h = cfg.config_hash()
    sections = [
        ReportSection("validation", "kernel", validate_kernel(kernel).to_dict(), h)
    ]
    if omega is not None:
        sections.append(ReportSection("validation", "omega", validate_omega(omega).to_dict(), h))
    if q is not None:
        M = cc.compute_M(kernel, omega) if omega and omega.kind == OMEGA_SUBLINEAR else 0.0
        xi = cc.compute_xi(q, M)
        sections.append(
            ReportSection("validation", "Q", validate_q(q, M, xi).to_dict(), h)
        )
        payload = {"M": M, "xi": xi, "eta": cc.compute_eta(q), "epsilon0": cfg.epsilon0}
        sections.append(ReportSection("constants", "constants", payload, h))
    return sections


def _cmd_validate(cfg: RunConfig, out: Path) -> int:
    kernel, q, omega, _ = _build_components(cfg)
    report = compose_report(_validation_sections(cfg, kernel, q, omega), _provenance(cfg))
    (out / "validation_report.json").write_text(report.to_json())
    return 0 if report.all_passed() else 1


def _cmd_solve_quasilinear(cfg: RunConfig, out: Path) -> int:
    kernel, _, omega, grid = _build_components(cfg)
    if omega is None or omega.kind != OMEGA_BOUNDED:
        raise ConfigError("solve-quasilinear needs an omega of the bounded class (O1, O2)")
    problem = QuasilinearProblem(kernel=kernel, omega1=omega, grid=grid, gammas=cfg.gammas)
    solutions = solve_quasilinear(problem)
    h = cfg.config_hash()
    sections, checks_ok = [], True
    for sol in solutions:
        tag = format(sol.gamma, "g")
        _write_csv(
            out / f"quasilinear_gamma_{tag}.csv",
            {
                "x": grid.nodes,
                "f": sol.f.values,
                "gx": sol.gamma * grid.nodes,
                "gx_plus_psi": sol.gamma * grid.nodes + sol.psi.values,
            },
        )
        sections.append(ReportSection("trace", f"gamma_{tag}", sol.trace.to_dict(), h))
        lower_ok = bool(np.all(sol.f.values >= sol.gamma * grid.nodes - 1e-6))
        upper = sol.gamma * grid.nodes + sol.psi.values
        upper_ok = bool(np.all(sol.f.values <= upper + 1e-6))
        sections.append(
            ReportSection(
                "check",
                f"two_sided_bounds_gamma_{tag}",
                make_check(
                    "two-sided-linear-envelope",
                    lower_ok and upper_ok,
                    float(np.max(sol.f.values - upper)),
                    1e-6,
                ),
                h,
            )
        )
        sections.append(
            ReportSection(
                "check",
                f"slope_gamma_{tag}",
                make_check(
                    "asymptotic-slope",
                    abs(sol.slope_estimate - sol.gamma)
                    <= sol.psi.sup_norm() / (0.8 * grid.x_max) + 1e-6,
                    sol.slope_estimate,
                    sol.gamma,
                ),
                h,
            )
        )
        checks_ok &= lower_ok and upper_ok
    report = compose_report(sections, _provenance(cfg))
    (out / "quasilinear_report.json").write_text(report.to_json())
    return 0 if checks_ok and report.all_passed() else 1


def _cmd_solve_nonlinear(cfg: RunConfig, out: Path, debug_both_readings: bool = False) -> int:
    kernel, q, omega, grid = _build_components(cfg)
    if q is None:
        raise ConfigError("solve-nonlinear needs a [Q] table")
    if omega is None or omega.kind != OMEGA_SUBLINEAR:
        raise ConfigError("solve-nonlinear needs an omega of the sublinear class (O3, O4)")
    problem = NonlinearProblem(kernel=kernel, q=q, omega2=omega, grid=grid, epsilon0=cfg.epsilon0)
    sol = solve_nonlinear(problem)
    columns = {
        "x": grid.nodes,
        "F": sol.F.values,
        "Phi": sol.Phi.values,
        "B": sol.B.values,
        "chi": sol.chi.values,
    }
    if debug_both_readings:
        _, alt = perturbation_envelope_ratio(kernel, q, omega, sol.Phi, both_readings=True)
        columns["chi_additive_reading"] = alt.values
    _write_csv(out / "nonlinear_profiles.csv", columns)

    h = cfg.config_hash()
    c = sol.constants
    rate = fit_geometric_rate(sol.trace)
    sections = [
        ReportSection("constants", "constants", c.to_dict(), h),
        ReportSection("trace", "main", sol.trace.to_dict(), h),
        ReportSection(
            "check", "sandwich",
            make_check("auxiliary-sandwich", sol.sandwich_ok, 0.0, 1e-9), h,
        ),
        ReportSection(
            "check", "origin_value",
            make_check("vanishes-at-origin", abs(sol.B.values[0]) <= 1e-8, float(sol.B.values[0]), 1e-8), h,
        ),
        ReportSection(
            "check", "upper_bound",
            make_check("below-apriori-bound", bool(np.all(sol.B.values < c.xi)), float(np.max(sol.B.values)), c.xi), h,
        ),
        ReportSection(
            "check", "ratio_range",
            make_check(
                "ratio-in-unit-interval",
                bool(np.all(sol.chi.values > 0.0) and np.all(sol.chi.values <= 1.0 + 1e-6)),
                float(np.min(sol.chi.values)),
                1.0,
            ),
            h,
        ),
        ReportSection(
            "check", "geometric_rate",
            make_check("fitted-rate-below-one", rate < 1.0, rate, 1.0), h,
        ),
        ReportSection(
            "check", "limit_level",
            make_check(
                "approaches-fixed-point-level",
                abs(sol.B.values[int(np.searchsorted(grid.nodes, 0.9 * grid.x_max))] - c.eta) <= 0.1,
                float(sol.B.values[int(np.searchsorted(grid.nodes, 0.9 * grid.x_max))]),
                c.eta,
            ),
            h,
        ),
    ]
    report = compose_report(sections, _provenance(cfg))
    (out / "nonlinear_report.json").write_text(report.to_json())
    return 0 if report.all_passed() else 1


def _cmd_report(cfg: RunConfig, out: Path) -> int:
    kernel, q, omega, _ = _build_components(cfg)
    report = compose_report(_validation_sections(cfg, kernel, q, omega), _provenance(cfg))
    (out / "run_report.json").write_text(report.to_json())
    return 0 if report.all_passed() else 1


def run_subcommand(cmd: str, cfg: RunConfig, out_dir: str | None = None,
                   debug_both_readings: bool = False) -> int:
    out = Path(out_dir if out_dir is not None else cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if cmd == "validate":
        return _cmd_validate(cfg, out)
    if cmd == "solve-quasilinear":
        return _cmd_solve_quasilinear(cfg, out)
    if cmd == "solve-nonlinear":
        return _cmd_solve_nonlinear(cfg, out, debug_both_readings)
    if cmd == "report":
        return _cmd_report(cfg, out)
    raise ConfigError(f"unknown subcommand {cmd!r}")


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="halfline-ie",
        description="Constructive solvers for integral equations with "
        "sum-difference kernels on the half-line",
    )
    parser.add_argument("command", choices=["validate", "solve-quasilinear", "solve-nonlinear", "report"])
    parser.add_argument("--config", required=True, help="path to a TOML run configuration")
    parser.add_argument("--out", default=None, help="output directory (default from config)")
    parser.add_argument("--threads", type=int, default=None, help="limit BLAS thread count")
    parser.add_argument(
        "--debug-chi-both-readings", action="store_true",
        help="emit both parenthesizations of the ratio denominator",
    )
    args = parser.parse_args(argv)

    if args.threads is not None:
        try:
            import threadpoolctl

            threadpoolctl.threadpool_limits(args.threads)
        except ImportError:
            print("threadpoolctl not installed; --threads ignored", file=sys.stderr)

    try:
        cfg = parse_config(args.config)
        return run_subcommand(args.command, cfg, args.out, args.debug_chi_both_readings)
    except HalflineError as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
