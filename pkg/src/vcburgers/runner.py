"""Experiment orchestration and the command-line interface.

Subcommands:

* ``run`` simulates one of the four preset experiments, writing a GRE/tau
  summary, per-snapshot profiles and AE tables, optional FD-oracle
  comparison and an optional refinement study.
* ``table`` re-renders the stored tables of a previous run.
* ``convergence`` runs the refinement study on its own.

Exit codes: 0 success, 2 configuration error, 3 simulation divergence.
"""

from __future__ import annotations

import os
import sys
import tempfile
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from pathlib import Path

import click
import numpy as np

from . import diagnostics, fd
from .coefficients import solve_params_field
from .errors import ConfigError, NonFiniteState, UnknownExample, VcBurgersError
from .lattice import (
    EQUILIBRIUM_RESET,
    NONEQ_EXTRAPOLATION,
    Grid1D,
    MacroField,
    NodeParams,
    simulate,
)
from .solutions import ExamplePreset, example_preset

DEFAULT_SNAPSHOTS = (0.2, 1.0, 1.8)

_BC_ALIASES = {
    "equilibrium": EQUILIBRIUM_RESET,
    "extrapolation": NONEQ_EXTRAPOLATION,
    EQUILIBRIUM_RESET: EQUILIBRIUM_RESET,
    NONEQ_EXTRAPOLATION: NONEQ_EXTRAPOLATION,
}


@dataclass(frozen=True)
class ExperimentConfig:
    example: int = 1
    domain: tuple[float, float] = (0.0, 40.0)
    dx: float = 0.01
    dt: float = 1e-4
    t_end: float = 1.8
    snapshot_times: tuple[float, ...] = DEFAULT_SNAPSHOTS
    eta: float = 1.0
    boundary_scheme: str = NONEQ_EXTRAPOLATION
    outputs: str | None = None
    run_oracle: bool = False
    refinement_levels: int = 0
    write_header: bool = True


def _steps_for(t: float, dt: float, what: str) -> int:
    n = int(round(t / dt))
    if abs(n * dt - t) > 1e-9:
        raise ConfigError(f"{what}={t} is not a multiple of dt={dt}")
    return n


def validate(config: ExperimentConfig) -> None:
    x_lo, x_hi = config.domain
    if not x_hi > x_lo:
        raise ConfigError(f"empty domain {config.domain}")
    if config.dx <= 0 or config.dt <= 0:
        raise ConfigError("dx and dt must be positive")
    span = (x_hi - x_lo) / config.dx
    if abs(span - round(span)) > 1e-9:
        raise ConfigError(
            f"domain width {x_hi - x_lo} is not an integer multiple of dx"
        )
    if config.t_end < 0:
        raise ConfigError("t_end must be >= 0")
    for st in config.snapshot_times:
        if not 0.0 <= st <= config.t_end + 1e-12:
            raise ConfigError(
                f"snapshot time {st} outside [0, t_end={config.t_end}]"
            )
        _steps_for(st, config.dt, "snapshot time")
    _steps_for(config.t_end, config.dt, "t_end")
    if config.boundary_scheme not in (EQUILIBRIUM_RESET, NONEQ_EXTRAPOLATION):
        raise ConfigError(f"unknown boundary scheme {config.boundary_scheme!r}")
    if not 0.0 < config.eta <= 1.0:
        raise ConfigError(f"eta must be in (0, 1], got {config.eta}")


def _grid_for(config: ExperimentConfig) -> Grid1D:
    x_lo, x_hi = config.domain
    nx = int(round((x_hi - x_lo) / config.dx)) + 1
    return Grid1D(x0=x_lo, nx=nx, dx=config.dx, dt=config.dt)


def run_lbm(config: ExperimentConfig, preset: ExamplePreset):
    """Run the lattice solver for a preset; returns (grid, SimulationResult)."""
    grid = _grid_for(config)
    x = grid.x
    model = preset.coefficient_model()
    eta = config.eta

    def params_at(t: float) -> NodeParams:
        a = np.broadcast_to(np.asarray(model.a(x, t), dtype=np.float64), x.shape)
        b = np.broadcast_to(np.asarray(model.b(x, t), dtype=np.float64), x.shape)
        tau, lam = solve_params_field(a, b, grid.c, grid.dt, eta)
        return NodeParams(tau=tau, eta=eta, lam=lam)

    def m_at(t: float):
        return np.broadcast_to(
            np.asarray(model.m(x, t), dtype=np.float64), x.shape
        )

    n_steps = _steps_for(config.t_end, config.dt, "t_end")
    snapshot_steps = {
        _steps_for(st, config.dt, "snapshot"): st for st in config.snapshot_times
    }
    u0 = MacroField(u=preset.initial_condition(x), t=0.0)
    result = simulate(
        grid=grid,
        u0=u0,
        params_at=params_at,
        m_at=m_at,
        boundary_values=preset.boundary_values,
        scheme=config.boundary_scheme,
        n_steps=n_steps,
        snapshot_steps=snapshot_steps,
    )
    return grid, result


def tau_range_at(preset: ExamplePreset, config: ExperimentConfig, t: float):
    """(min, max) of the tau field implied by the coefficients at time t."""
    grid = _grid_for(config)
    model = preset.coefficient_model()
    x = grid.x
    a = np.broadcast_to(np.asarray(model.a(x, t), dtype=np.float64), x.shape)
    b = np.broadcast_to(np.asarray(model.b(x, t), dtype=np.float64), x.shape)
    tau, _ = solve_params_field(a, b, grid.c, grid.dt, config.eta)
    return float(tau.min()), float(tau.max())


def run_oracle(
    preset: ExamplePreset, config: ExperimentConfig, times: tuple[float, ...]
):
    """FD-oracle fields at the requested times (one continuing march)."""
    grid = _grid_for(config)
    x = grid.x
    model = preset.coefficient_model()
    u0 = preset.initial_condition(x)
    a0 = np.asarray(model.a(x, 0.0), dtype=np.float64)
    b0 = np.asarray(model.b(x, 0.0), dtype=np.float64)
    dt_fd = fd.stable_dt(u0, a0, b0, grid.dx)
    cfg = fd.FdConfig(grid=grid, dt_fd=dt_fd)
    out = {}
    u = MacroField(u=u0, t=0.0)
    for t in sorted(times):
        u = fd.run_fd(
            u, model, cfg, preset.boundary_values, config.boundary_scheme, t
        )
        out[t] = u
    return out


def refinement_study(
    example: int,
    levels: int = 3,
    t_end: float = 0.2,
    dx0: float = 0.02,
    dt0: float = 4e-4,
    base: ExperimentConfig | None = None,
):
    """GRE against the closed form under simultaneous refinement.

    Each level halves dx and quarters dt (diffusive scaling), which keeps
    tau fixed under the coefficient inversion; see the package notes on
    why refinement at fixed lattice speed does not converge for this
    scheme.  Returns ([(dx, dt, gre), ...], fitted_order).
    """
    preset = example_preset(example)
    base = base or ExperimentConfig(example=example)
    rows = []
    for level in range(levels):
        dx = dx0 / 2**level
        dt = dt0 / 4**level
        config = replace(
            base,
            example=example,
            dx=dx,
            dt=dt,
            t_end=t_end,
            snapshot_times=(t_end,),
        )
        validate(config)
        grid, result = run_lbm(config, preset)
        u_num = result.snapshots[t_end]
        u_ref = MacroField(u=preset.closed_form(grid.x, t_end), t=t_end)
        rows.append((dx, dt, diagnostics.global_relative_error(u_num, u_ref)))
    order = diagnostics.convergence_order(
        [r[2] for r in rows], [r[0] for r in rows]
    )
    return rows, order


def run_experiment(config: ExperimentConfig) -> dict[str, str]:
    """Run one experiment end to end; returns {filename: text} and, when
    config.outputs is set, atomically writes the files there."""
    validate(config)
    preset = example_preset(config.example)
    grid, result = run_lbm(config, preset)
    x = grid.x

    files: dict[str, str] = {}
    reports = []
    for t in sorted(result.snapshots):
        u_num = result.snapshots[t]
        u_ref = MacroField(u=preset.closed_form(x, t), t=t)
        report = diagnostics.build_report(
            x, u_num, u_ref, tau_range_at(preset, config, t)
        )
        reports.append(report)
        files[f"profile_t{t:g}.csv"] = diagnostics.render_profile(x, u_num, u_ref)
        files[f"ae_table_t{t:g}.csv"] = diagnostics.render_ae_table(report)
        files[f"plot_t{t:g}.dat"] = _render_plot(x, u_num.u)
        files[f"plot_ref_t{t:g}.dat"] = _render_plot(x, u_ref.u)
    files["summary.csv"] = diagnostics.render_summary(reports)

    if config.run_oracle:
        files["oracle.csv"] = _oracle_comparison(preset, config, result)

    if config.refinement_levels > 0:
        rows, order = refinement_study(
            config.example,
            levels=config.refinement_levels,
            dx0=config.dx * 2,
            dt0=config.dt * 4,
            base=config,
        )
        files["convergence.csv"] = diagnostics.render_convergence(rows, order)

    if config.write_header:
        stamp = datetime.now(timezone.utc).isoformat(timespec="seconds")
        header = (
            f"# vcburgers example={config.example} dx={config.dx:g} "
            f"dt={config.dt:g} t_end={config.t_end:g} "
            f"bc={config.boundary_scheme} generated={stamp}\n"
        )
        files = {name: header + text for name, text in files.items()}

    if config.outputs:
        _write_atomically(Path(config.outputs), files)
    return files


def _render_plot(x: np.ndarray, u: np.ndarray) -> str:
    return "".join(f"{xi:g} {ui:.10g}\n" for xi, ui in zip(x, u))


def _oracle_comparison(preset, config, result) -> str:
    times = tuple(sorted(result.snapshots))
    oracle_fields = run_oracle(preset, config, times)
    grid = _grid_for(config)
    lines = ["t,gre_lbm,gre_fd,max_diff"]
    for t in times:
        u_ref = MacroField(u=preset.closed_form(grid.x, t), t=t)
        u_lbm = result.snapshots[t]
        u_fd = oracle_fields[t]
        gre_lbm = diagnostics.global_relative_error(u_lbm, u_ref)
        gre_fd = diagnostics.global_relative_error(u_fd, u_ref)
        max_diff = float(np.max(np.abs(u_lbm.u - u_fd.u)))
        lines.append(f"{t:g},{gre_lbm:.6e},{gre_fd:.6e},{max_diff:.6e}")
    return "\n".join(lines) + "\n"


def _write_atomically(out_dir: Path, files: dict[str, str]) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    with tempfile.TemporaryDirectory(
        dir=out_dir.parent, prefix=out_dir.name + ".tmp"
    ) as tmp:
        tmp_paths = []
        for name, text in files.items():
            path = Path(tmp) / name
            path.write_text(text)
            tmp_paths.append((path, out_dir / name))
        for src, dst in tmp_paths:
            os.replace(src, dst)


# --------------------------------------------------------------------------
# CLI


def _load_config_file(path: str) -> dict:
    import configparser

    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise ConfigError(f"cannot read config file {path}")
    section = parser["experiment"] if parser.has_section("experiment") else parser["DEFAULT"]
    return dict(section)


def _build_config(cfg_file: dict, **flags) -> ExperimentConfig:
    def pick(name, cast, default):
        if flags.get(name) is not None:
            return flags[name]
        if name in cfg_file:
            raw = cfg_file[name]
            return cast(raw)
        return default

    bc = pick("bc", str, "extrapolation")
    if bc not in _BC_ALIASES:
        raise ConfigError(f"unknown boundary scheme {bc!r}")
    t_end = pick("t_end", float, 1.8)
    snapshots = tuple(t for t in DEFAULT_SNAPSHOTS if t <= t_end + 1e-12)
    if t_end > 0 and not snapshots:
        snapshots = (t_end,)
    elif t_end == 0:
        snapshots = (0.0,)
    return ExperimentConfig(
        example=int(pick("example", int, 1)),
        dx=pick("dx", float, 0.01),
        dt=pick("dt", float, 1e-4),
        t_end=t_end,
        snapshot_times=snapshots,
        eta=pick("eta", float, 1.0),
        boundary_scheme=_BC_ALIASES[bc],
        outputs=pick("out", str, None),
        run_oracle=bool(flags.get("oracle") or cfg_file.get("oracle") == "true"),
        refinement_levels=int(pick("refine", int, 0)),
        write_header=not flags.get("no_header", False),
    )


@click.group()
def cli():
    """D1Q3 lattice Boltzmann experiments for the variable-coefficient
    forced Burgers equation."""


@cli.command("run")
@click.option("--example", type=click.IntRange(1, 4), default=None)
@click.option("--config", "config_path", type=click.Path(), default=None)
@click.option("--dx", type=float, default=None)
@click.option("--dt", type=float, default=None)
@click.option("--t-end", "t_end", type=float, default=None)
@click.option("--eta", type=float, default=None)
@click.option("--bc", type=click.Choice(["equilibrium", "extrapolation"]), default=None)
@click.option("--oracle", is_flag=True, default=False)
@click.option("--refine", type=int, default=None)
@click.option("--out", type=click.Path(), default=None)
@click.option("--no-header", "no_header", is_flag=True, default=False)
def cmd_run(config_path, **flags):
    """Run one experiment and write its output files."""
    cfg_file = _load_config_file(config_path) if config_path else {}
    config = _build_config(cfg_file, **flags)
    files = run_experiment(config)
    click.echo(files["summary.csv"], nl=False)
    if config.outputs:
        click.echo(f"wrote {len(files)} files to {config.outputs}")


@cli.command("table")
@click.option("--in", "in_dir", type=click.Path(exists=True), required=True)
def cmd_table(in_dir):
    """Re-render the tables stored in a run directory."""
    in_dir = Path(in_dir)
    summary = in_dir / "summary.csv"
    if not summary.exists():
        raise ConfigError(f"{summary} not found")
    click.echo(summary.read_text(), nl=False)
    for path in sorted(in_dir.glob("ae_table_t*.csv")):
        click.echo(f"\n== {path.name} ==")
        click.echo(path.read_text(), nl=False)


@cli.command("convergence")
@click.option("--example", type=click.IntRange(1, 4), default=1)
@click.option("--levels", type=click.IntRange(2, 8), default=3)
@click.option("--t-end", "t_end", type=float, default=0.2)
@click.option("--out", type=click.Path(), default=None)
def cmd_convergence(example, levels, t_end, out):
    """Run the grid refinement study."""
    rows, order = refinement_study(example, levels=levels, t_end=t_end)
    text = diagnostics.render_convergence(rows, order)
    click.echo(text, nl=False)
    if out:
        _write_atomically(Path(out), {"convergence.csv": text})


def main(argv=None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.ClickException as exc:
        exc.show()
        return 2
    except click.Abort:
        return 2
    except (ConfigError, UnknownExample) as exc:
        click.echo(f"config error: {exc}", err=True)
        return 2
    except NonFiniteState as exc:
        where = f" at step {exc.step_index}" if exc.step_index is not None else ""
        click.echo(f"simulation diverged{where}: {exc}", err=True)
        return 3
    except VcBurgersError as exc:
        click.echo(f"error: {exc}", err=True)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
