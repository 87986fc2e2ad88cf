"""Config-driven scenario runner with CSV output.

Configuration files are flat ``key=value`` text (``#`` starts a comment).
Recognized keys::

    scenario=bar1d                 # sdof2 | sdof3 | bar1d | plate2d | wave2d
    method=coupled                 # coupled | backward_euler | monolithic_newmark
    dt_system=0.001                # optional override
    duration=0.025                 # optional override
    output=bar.csv                 # output path (relative paths honor MTS_OUTPUT_DIR)
    subdomain.2.eta=100            # per-subdomain overrides, 1-based indices
    subdomain.1.beta=0.25
    subdomain.1.gamma=0.5
    probe=3:10                     # subdomain:dof, repeatable; defaults per scenario

One CSV row is written per system time level (so step count + 1 rows)
with the fixed column order::

    t, E_total, E_kinetic, E_potential, e_algorithm, e_interface,
    norm_d_drift, norm_a_drift, norm_v_residual,
    lambda_0..lambda_{N_C-1}, probe values...

Floats are printed with 17 significant digits; identical configs produce
identical bytes.  Exit codes: 0 success, 2 configuration error, 3 solver
failure (the failing step index is reported on stderr).

``sweep`` repeats a base configuration along one axis (``dt_system`` or
``eta``) and writes a per-run CSV plus a summary CSV with the final-time
oracle error (when the scenario has an oracle), max |e_interface| and max
drift norms for each value.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import diagnostics, problems
from .baselines import backward_euler_step, merge_system_matrices
from .coupling import CoupledSystem, advance_system_step
from .errors import (
    ConfigError,
    DimensionMismatch,
    NotConverged,
    SingularMatrix,
    SingularSaddleSystem,
)
from .newmark import EffectiveSolver, KinematicState, NewmarkParams

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3

#: Default (builder, subdomain count, default etas) per scenario name.
_SCENARIO_INFO = {
    "sdof2": (problems.build_sdof2, 2, (1, 4)),
    "sdof3": (problems.build_sdof3, 3, (1, 2, 4)),
    "bar1d": (problems.build_bar_1d, 3, (1, 10, 1)),
    "plate2d": (problems.build_plate_2d, 4, (5, 5, 5, 1)),
    "wave2d": (problems.build_wave_2d, 2, (10, 1)),
}

_METHODS = ("coupled", "backward_euler", "monolithic_newmark")


@dataclass
class RunConfig:
    """Parsed run configuration."""

    scenario: str
    method: str = "coupled"
    dt_system: Optional[float] = None
    duration: Optional[float] = None
    output_path: Optional[str] = None
    eta_overrides: dict[int, int] = field(default_factory=dict)
    newmark_overrides: dict[int, dict[str, float]] = field(default_factory=dict)
    probes: Optional[tuple[tuple[int, int], ...]] = None


def parse_config(path: str | Path) -> RunConfig:
    """Parse a flat key=value configuration file."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc

    values: dict[str, str] = {}
    probes: list[tuple[int, int]] = []
    eta_overrides: dict[int, int] = {}
    newmark_overrides: dict[int, dict[str, float]] = {}

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        try:
            if key == "probe":
                sub_s, _, dof_s = value.partition(":")
                probes.append((int(sub_s) - 1, int(dof_s)))
            elif key.startswith("subdomain."):
                _, idx_s, attr = key.split(".", 2)
                idx = int(idx_s) - 1
                if idx < 0:
                    raise ValueError("subdomain indices are 1-based")
                if attr == "eta":
                    eta_overrides[idx] = int(value)
                elif attr in ("beta", "gamma"):
                    newmark_overrides.setdefault(idx, {})[attr] = float(value)
                else:
                    raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            elif key in ("scenario", "method", "output", "dt_system", "duration"):
                values[key] = value
            else:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"{path}:{lineno}: bad value for {key!r}: {exc}") from exc

    if "scenario" not in values:
        raise ConfigError(f"{path}: missing required key 'scenario'")
    scenario = values["scenario"]
    if scenario not in _SCENARIO_INFO:
        raise ConfigError(
            f"{path}: unknown scenario {scenario!r}; "
            f"choose from {sorted(_SCENARIO_INFO)}"
        )
    method = values.get("method", "coupled")
    if method not in _METHODS:
        raise ConfigError(f"{path}: unknown method {method!r}; choose from {_METHODS}")

    try:
        dt_system = float(values["dt_system"]) if "dt_system" in values else None
        duration = float(values["duration"]) if "duration" in values else None
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc

    return RunConfig(
        scenario=scenario,
        method=method,
        dt_system=dt_system,
        duration=duration,
        output_path=values.get("output"),
        eta_overrides=eta_overrides,
        newmark_overrides=newmark_overrides,
        probes=tuple(probes) or None,
    )


def build_scenario(config: RunConfig) -> problems.Scenario:
    """Instantiate the configured scenario with all overrides applied."""
    builder, n_subs, default_etas = _SCENARIO_INFO[config.scenario]
    for idx in list(config.eta_overrides) + list(config.newmark_overrides):
        if not 0 <= idx < n_subs:
            raise ConfigError(
                f"subdomain index {idx + 1} out of range for scenario "
                f"{config.scenario} ({n_subs} subdomains)"
            )

    kwargs: dict = {}
    etas = list(default_etas)
    for idx, eta in config.eta_overrides.items():
        if eta < 1:
            raise ConfigError(f"subdomain.{idx + 1}.eta must be >= 1, got {eta}")
        etas[idx] = eta
    kwargs["etas"] = tuple(etas)
    if config.dt_system is not None:
        kwargs["dt_system"] = config.dt_system
    if config.duration is not None:
        kwargs["duration"] = config.duration

    if config.newmark_overrides:
        # Start from the builder's defaults, patch the overridden entries.
        base = builder(**{k: v for k, v in kwargs.items() if k != "etas"})
        new_params = []
        for i, sub in enumerate(base.system.subdomains):
            patch = config.newmark_overrides.get(i, {})
            beta = patch.get("beta", sub.params.beta)
            gamma = patch.get("gamma", sub.params.gamma)
            try:
                new_params.append(NewmarkParams(beta=beta, gamma=gamma))
            except ValueError as exc:
                raise ConfigError(f"subdomain.{i + 1}: {exc}") from exc
        kwargs["params"] = tuple(new_params)

    try:
        scenario = builder(**kwargs)
    except (ValueError, DimensionMismatch) as exc:
        raise ConfigError(f"scenario construction failed: {exc}") from exc
    if config.duration is not None:
        scenario = replace(scenario, duration=config.duration)
    if config.probes is not None:
        for i, dof in config.probes:
            if not 0 <= i < n_subs:
                raise ConfigError(f"probe subdomain index {i + 1} out of range")
            if not 0 <= dof < scenario.system.subdomains[i].n_dofs:
                raise ConfigError(f"probe DOF {dof} out of range in subdomain {i + 1}")
        scenario = replace(scenario, probes=config.probes)
    return scenario


# ---------------------------------------------------------------------------
# Execution
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RunResult:
    """In-memory outcome of one run: CSV rows plus summary statistics."""

    header: tuple[str, ...]
    rows: tuple[tuple[float, ...], ...]
    final_oracle_error: Optional[float]
    max_abs_e_interface: float
    max_norm_d_drift: float
    max_norm_a_drift: float


def _row(t, energy, drift, lams, probe_vals):
    e_kin = sum(energy.kinetic)
    e_pot = sum(energy.potential)
    return (
        t,
        energy.total,
        e_kin,
        e_pot,
        energy.e_algorithm,
        energy.e_interface,
        float(np.linalg.norm(drift[0])),
        float(np.linalg.norm(drift[1])),
        float(np.linalg.norm(drift[2])),
        *lams,
        *probe_vals,
    )


def _header(n_c: int, probes) -> tuple[str, ...]:
    return (
        "t",
        "E_total",
        "E_kinetic",
        "E_potential",
        "e_algorithm",
        "e_interface",
        "norm_d_drift",
        "norm_a_drift",
        "norm_v_residual",
        *(f"lambda_{k}" for k in range(n_c)),
        *(f"probe_{i + 1}_{dof}" for i, dof in probes),
    )


def execute(config: RunConfig) -> RunResult:
    """Run a configuration to completion, collecting all CSV rows."""
    scenario = build_scenario(config)
    if config.method == "backward_euler" and any(
        eta != 1 for eta in scenario.system.eta
    ):
        # The baseline has no subcycling: force every subdomain onto the
        # system time-step.
        forced = replace(
            config,
            eta_overrides={i: 1 for i in range(len(scenario.system.eta))},
        )
        scenario = build_scenario(forced)

    if config.method == "monolithic_newmark":
        return _execute_monolithic(scenario)

    sys_state = scenario.system
    dt = sys_state.dt_system
    n_steps = math.ceil(scenario.duration / dt - 1e-9)
    probes = scenario.probes
    n_c = sys_state.n_constraints

    def probe_vals(s: CoupledSystem):
        return [float(s.states[i].d[dof]) for i, dof in probes]

    rows = []
    energy0 = diagnostics.total_energy(sys_state)
    drift0 = diagnostics.drift_record(sys_state)
    rows.append(
        _row(
            sys_state.t_current,
            energy0,
            (drift0.d_drift, drift0.a_drift, drift0.v_residual),
            sys_state.lambda_current,
            probe_vals(sys_state),
        )
    )

    max_e_int = 0.0
    max_d_drift = float(np.linalg.norm(drift0.d_drift))
    max_a_drift = float(np.linalg.norm(drift0.a_drift))
    step_fn = (
        backward_euler_step if config.method == "backward_euler" else advance_system_step
    )
    for step_index in range(n_steps):
        try:
            result = step_fn(sys_state)
        except (SingularSaddleSystem, SingularMatrix, NotConverged) as exc:
            raise SolverFailure(step_index, exc) from exc
        report = diagnostics.step_energy_report(result, sys_state)
        if config.method == "backward_euler":
            # Interface forces do no net work under this baseline (the
            # gamma-weighted split does not apply); report the decay
            # identity instead.
            decay = 0.0
            for sub, st, hist in zip(
                sys_state.subdomains, sys_state.states, result.new_states
            ):
                dv = hist[-1].v - st.v
                dd = hist[-1].d - st.d
                decay -= 0.5 * float(dv @ (sub.M @ dv)) + 0.5 * float(dd @ (sub.K @ dd))
            report = replace(report, e_algorithm=decay, e_interface=0.0)
        sys_state = sys_state.apply(result)
        drift = diagnostics.drift_record(sys_state)
        rows.append(
            _row(
                sys_state.t_current,
                report,
                (drift.d_drift, drift.a_drift, drift.v_residual),
                sys_state.lambda_current,
                probe_vals(sys_state),
            )
        )
        max_e_int = max(max_e_int, abs(report.e_interface))
        max_d_drift = max(max_d_drift, float(np.linalg.norm(drift.d_drift)))
        max_a_drift = max(max_a_drift, float(np.linalg.norm(drift.a_drift)))

    final_error = None
    if scenario.oracle is not None and probes:
        i, dof = probes[0]
        final_error = abs(
            float(sys_state.states[i].d[dof]) - scenario.oracle(sys_state.t_current)
        )

    return RunResult(
        header=_header(n_c, probes),
        rows=tuple(rows),
        final_oracle_error=final_error,
        max_abs_e_interface=max_e_int,
        max_norm_d_drift=max_d_drift,
        max_norm_a_drift=max_a_drift,
    )


def _execute_monolithic(scenario: problems.Scenario) -> RunResult:
    """Undecomposed single-scheme Newmark reference run.

    Requires uniform (beta, gamma) across subdomains.  Interface columns
    (lambdas, drifts, e_interface) are identically zero by construction.
    """
    sys0 = scenario.system
    params = sys0.subdomains[0].params
    for sub in sys0.subdomains[1:]:
        if sub.params != params:
            raise ConfigError(
                "monolithic_newmark requires uniform Newmark parameters"
            )
    M, K, force, maps = merge_system_matrices(sys0)
    from .newmark import consistent_initial_acceleration

    size = M.shape[0]
    d0 = np.zeros(size)
    v0 = np.zeros(size)
    for st, mp in zip(sys0.states, maps):
        d0[mp] = st.d
        v0[mp] = st.v
    state = KinematicState(
        d=d0, v=v0, a=consistent_initial_acceleration(M, K, force(sys0.t_current), d0)
    )
    dt = sys0.dt_system
    n_steps = math.ceil(scenario.duration / dt - 1e-9)
    probes = scenario.probes
    solver = EffectiveSolver(M, K, params, dt)

    def energy(st: KinematicState) -> tuple[float, float]:
        return 0.5 * float(st.v @ (M @ st.v)), 0.5 * float(st.d @ (K @ st.d))

    def make_row(t, st, e_alg):
        kin, pot = energy(st)
        vals = [float(st.d[maps[i][dof]]) for i, dof in probes]
        return (t, kin + pot, kin, pot, e_alg, 0.0, 0.0, 0.0, 0.0, *vals)

    rows = [make_row(sys0.t_current, state, 0.0)]
    t = sys0.t_current
    prev_total = sum(energy(state))
    for _ in range(n_steps):
        t += dt
        state = solver.step(state, force(t))
        total = sum(energy(state))
        rows.append(make_row(t, state, total - prev_total))
        prev_total = total

    final_error = None
    if scenario.oracle is not None and probes:
        i, dof = probes[0]
        final_error = abs(float(state.d[maps[i][dof]]) - scenario.oracle(t))

    header = (
        "t",
        "E_total",
        "E_kinetic",
        "E_potential",
        "e_algorithm",
        "e_interface",
        "norm_d_drift",
        "norm_a_drift",
        "norm_v_residual",
        *(f"probe_{i + 1}_{dof}" for i, dof in probes),
    )
    return RunResult(
        header=header,
        rows=tuple(rows),
        final_oracle_error=final_error,
        max_abs_e_interface=0.0,
        max_norm_d_drift=0.0,
        max_norm_a_drift=0.0,
    )


class SolverFailure(Exception):
    """Wraps a solver error with the system step index where it occurred."""

    def __init__(self, step_index: int, cause: Exception):
        super().__init__(f"solver failure at step {step_index}: {cause}")
        self.step_index = step_index


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------

def _resolve_output(path: str) -> Path:
    out = Path(path)
    if not out.is_absolute():
        base = os.environ.get("MTS_OUTPUT_DIR")
        if base:
            out = Path(base) / out
    return out


def _format_value(x: float) -> str:
    return f"{x:.17g}"


def write_csv(result: RunResult, path: str | Path) -> None:
    out = _resolve_output(str(path))
    out.parent.mkdir(parents=True, exist_ok=True)
    lines = [",".join(result.header)]
    lines.extend(",".join(_format_value(v) for v in row) for row in result.rows)
    out.write_text("\n".join(lines) + "\n", newline="\n")


def run(config: RunConfig) -> int:
    """Execute one run and write its CSV; returns a process exit code."""
    try:
        result = execute(config)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SolverFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    output = config.output_path or f"{config.scenario}.csv"
    write_csv(result, output)
    return EXIT_OK


def _parse_eta_value(raw: str, n_subs: int, base: RunConfig) -> dict[int, int]:
    """One eta-axis value: either 'a:b:...' per subdomain or a single int.

    A single integer applies to the subdomains that carry an eta override
    in the base config (all subdomains when the base has none).
    """
    if ":" in raw:
        parts = [int(p) for p in raw.split(":")]
        if len(parts) != n_subs:
            raise ConfigError(
                f"eta value {raw!r} has {len(parts)} entries for {n_subs} subdomains"
            )
        return dict(enumerate(parts))
    value = int(raw)
    targets = sorted(base.eta_overrides) or list(range(n_subs))
    return {i: value for i in targets}


def sweep(base: RunConfig, axis: str, values: Sequence[str]) -> int:
    """Run the base config once per axis value; write per-run + summary CSVs."""
    if axis not in ("dt_system", "eta"):
        print(f"configuration error: unknown sweep axis {axis!r}", file=sys.stderr)
        return EXIT_CONFIG
    if not values:
        print("configuration error: sweep needs at least one value", file=sys.stderr)
        return EXIT_CONFIG
    _, n_subs, _ = _SCENARIO_INFO.get(base.scenario, (None, 0, ()))

    base_output = Path(base.output_path or f"{base.scenario}.csv")
    summary_rows = []
    for raw in values:
        try:
            if axis == "dt_system":
                cfg = replace(base, dt_system=float(raw))
            else:
                cfg = replace(base, eta_overrides=_parse_eta_value(raw, n_subs, base))
            result = execute(cfg)
        except ConfigError as exc:
            print(f"configuration error ({axis}={raw}): {exc}", file=sys.stderr)
            return EXIT_CONFIG
        except SolverFailure as exc:
            print(f"error ({axis}={raw}): {exc}", file=sys.stderr)
            return EXIT_SOLVER
        tag = raw.replace(":", "-")
        member = base_output.with_name(
            f"{base_output.stem}_{axis}_{tag}{base_output.suffix or '.csv'}"
        )
        write_csv(result, member)
        summary_rows.append(
            (
                raw,
                result.final_oracle_error,
                result.max_abs_e_interface,
                result.max_norm_d_drift,
                result.max_norm_a_drift,
            )
        )

    summary = base_output.with_name(f"{base_output.stem}_summary.csv")
    out = _resolve_output(str(summary))
    out.parent.mkdir(parents=True, exist_ok=True)
    lines = [
        f"{axis},final_oracle_error,max_abs_e_interface,max_norm_d_drift,max_norm_a_drift"
    ]
    for raw, err, e_int, d_drift, a_drift in summary_rows:
        err_s = "" if err is None else _format_value(err)
        lines.append(
            f"{raw},{err_s},{_format_value(e_int)},"
            f"{_format_value(d_drift)},{_format_value(a_drift)}"
        )
    out.write_text("\n".join(lines) + "\n", newline="\n")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="mtstep",
        description="Multi-time-step coupled elastodynamics scenario runner",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run one configuration")
    p_run.add_argument("config", help="path to a key=value config file")
    p_sweep = sub.add_parser("sweep", help="repeat a run along one axis")
    p_sweep.add_argument("config", help="path to a key=value config file")
    p_sweep.add_argument("--axis", required=True, choices=("dt_system", "eta"))
    p_sweep.add_argument(
        "--values", required=True, help="comma-separated axis values"
    )
    args = parser.parse_args(argv)

    try:
        config = parse_config(args.config)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    if args.command == "run":
        return run(config)
    return sweep(config, args.axis, [v for v in args.values.split(",") if v])


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(main())
