"""Command-line surface: crit, ci, table1, simulate, backout.

Exit codes are a stable contract for pipeline use: 0 on success, 1 on
computational failure (including any failed input row), 2 on usage errors.
All numeric output is formatted deterministically so repeated runs produce
byte-identical files.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import sys
from pathlib import Path

import click

from .backout import backout_standard_errors, load_reference_table
from .critical_value import generate_table1, solve_critical_value
from .intervals import build_ci_ma, build_ci_ti, relative_excess_length
from .problem_io import read_key_value_config, read_problem_file, write_problem_file
from .simulation import METHODS, ExperimentConfig, run_experiment

__all__ = ["main"]

_ENV_THREAD_CAP = "BOUNDS_CI_THREADS"


def _fmt(x: float, digits: int = 10) -> str:
    if math.isinf(x):
        return "inf"
    return f"{x:.{digits}g}"


def _capped_workers(workers: int) -> int:
    cap = os.environ.get(_ENV_THREAD_CAP)
    if cap:
        try:
            workers = min(workers, max(1, int(cap)))
        except ValueError as exc:
            raise click.ClickException(f"{_ENV_THREAD_CAP} must be an integer: {exc}")
    return workers


_SEED_HELP = "Seed for random components; deterministic subcommands accept it for interface uniformity."


@click.group()
def main() -> None:
    """Misspecification-adaptive confidence intervals for bounded parameters."""


@main.command()
@click.option("--rho", type=float, required=True, help="Correlation of the bound estimators.")
@click.option("--alpha", type=float, default=0.05, show_default=True, help="Nominal level.")
@click.option("--rho-known-zero", is_flag=True,
              help="Assert zero correlation is known a priori (enables the one-sided shortcut).")
@click.option("--tol", type=float, default=1e-4, show_default=True, help="Coverage tolerance.")
@click.option("--seed", type=int, default=0, help=_SEED_HELP)
def crit(rho: float, alpha: float, rho_known_zero: bool, tol: float, seed: int) -> None:
    """Solve for the bounds-interval critical value at (rho, alpha)."""
    try:
        res = solve_critical_value(rho, alpha, rho_known_zero=rho_known_zero, tol=tol)
    except (ValueError, RuntimeError) as exc:
        raise click.ClickException(str(exc))
    click.echo(f"c_hat={res.c_hat:.6f}")
    click.echo(f"infimal_coverage={res.infimal_coverage:.6f}")
    click.echo(f"argmin_delta={_fmt(res.argmin_delta, 6)}")
    click.echo(f"method={res.method}")
    click.echo(f"iterations={res.iterations}")


@main.command()
@click.argument("problem_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--with-ti", is_flag=True, help="Also compute the test-inversion baseline.")
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv",
              show_default=True)
@click.option("--coverage-mode", type=click.Choice(["point", "set"]), default="point",
              show_default=True, help="Cover a point of the identified set, or the whole set.")
@click.option("--out", type=click.Path(dir_okay=False), default=None,
              help="Output path (stdout by default).")
@click.option("--seed", type=int, default=0, help=_SEED_HELP)
def ci(problem_file: str, with_ti: bool, fmt: str, coverage_mode: str,
       out: str | None, seed: int) -> None:
    """Build intervals for every row of a problem file."""
    problems, errors = read_problem_file(problem_file)
    any_failed = bool(errors)
    for err in errors:
        click.echo(f"error: {err}", err=True)

    mode = "point_coverage" if coverage_mode == "point" else "set_coverage"
    records = []
    for p in problems:
        try:
            report = build_ci_ma(p, mode=mode)
            rec = {
                "label": p.label,
                "theta_L": p.theta_L_hat,
                "theta_U": p.theta_U_hat,
                "ci_ma_lo": report.ci_ma.lower,
                "ci_ma_hi": report.ci_ma.upper,
                "ci_ti_lo": None,
                "ci_ti_hi": None,
                "c_hat": report.c_hat,
                "rel_length": None,
                "report": report,
            }
            if with_ti:
                ti = build_ci_ti(p)
                if not ti.empty:
                    rec["ci_ti_lo"] = ti.lower
                    rec["ci_ti_hi"] = ti.upper
                    rec["rel_length"] = relative_excess_length(report.ci_ma, ti, p.delta_hat)
                else:
                    click.echo(f"note: {p.label or 'row'}: test inversion rejects everywhere "
                               "(embedded specification rejection)", err=True)
            records.append(rec)
        except (ValueError, RuntimeError) as exc:
            any_failed = True
            click.echo(f"error: {p.label or 'row'}: {exc}", err=True)

    text = _render_ci(records, fmt)
    if out is None:
        click.echo(text, nl=False)
    else:
        Path(out).write_text(text, encoding="utf-8")
    if any_failed:
        raise click.exceptions.Exit(1)


def _render_ci(records: list[dict], fmt: str) -> str:
    if fmt == "json":
        payload = []
        for rec in records:
            d = rec["report"].to_dict()
            d["ci_ti"] = (None if rec["ci_ti_lo"] is None
                          else {"lower": rec["ci_ti_lo"], "upper": rec["ci_ti_hi"]})
            d["rel_length"] = rec["rel_length"]
            payload.append(d)
        return json.dumps(payload, indent=2) + "\n"
    buf = []
    header = "label,theta_L,theta_U,ci_ma_lo,ci_ma_hi,ci_ti_lo,ci_ti_hi,c_hat,rel_length"
    buf.append(header)
    for rec in records:
        fields = [
            rec["label"],
            _fmt(rec["theta_L"]), _fmt(rec["theta_U"]),
            _fmt(rec["ci_ma_lo"]), _fmt(rec["ci_ma_hi"]),
            "" if rec["ci_ti_lo"] is None else _fmt(rec["ci_ti_lo"]),
            "" if rec["ci_ti_hi"] is None else _fmt(rec["ci_ti_hi"]),
            _fmt(rec["c_hat"]),
            "" if rec["rel_length"] is None else _fmt(rec["rel_length"], 4),
        ]
        sio = io.StringIO()
        csv.writer(sio, lineterminator="").writerow(fields)
        buf.append(sio.getvalue())
    return "\n".join(buf) + "\n"


@main.command(name="table1")
@click.option("--rhos", default="0.8,0.85,0.9,0.95,0.98,0.99,1.0", show_default=True,
              help="Comma-separated correlations.")
@click.option("--alphas", default="0.1,0.05,0.01", show_default=True,
              help="Comma-separated levels.")
@click.option("--format", "fmt", type=click.Choice(["csv", "text"]), default="csv",
              show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None,
              help="Output path (stdout by default).")
@click.option("--seed", type=int, default=0, help=_SEED_HELP)
def table1(rhos: str, alphas: str, fmt: str, out: str | None, seed: int) -> None:
    """Critical values over a (rho, alpha) grid, as CSV or a formatted table."""
    try:
        rho_list = [float(v) for v in rhos.split(",") if v.strip()]
        alpha_list = [float(v) for v in alphas.split(",") if v.strip()]
        cells = generate_table1(rho_list, alpha_list)
    except (ValueError, RuntimeError) as exc:
        raise click.ClickException(str(exc))

    if fmt == "csv":
        lines = ["rho,alpha,c_hat,infimal_coverage,argmin_delta"]
        for cell in cells:
            lines.append(",".join([
                _fmt(cell.rho, 6), _fmt(cell.alpha, 6), _fmt(cell.c_hat),
                _fmt(cell.infimal_coverage), _fmt(cell.argmin_delta, 6),
            ]))
        text = "\n".join(lines) + "\n"
    else:
        width = 8
        header = "rho".ljust(10) + "".join(f"{r:>{width}.2f}" for r in rho_list)
        lines = [header, "-" * len(header)]
        for alpha in alpha_list:
            row = [f"alpha={alpha:<4g}".ljust(10)]
            for rho in rho_list:
                cell = next(c for c in cells if c.rho == rho and c.alpha == alpha)
                row.append(f"{cell.c_rounded:>{width}.2f}")
            lines.append("".join(row))
        text = "\n".join(lines) + "\n"

    if out is None:
        click.echo(text, nl=False)
    else:
        Path(out).write_text(text, encoding="utf-8")


_CONFIG_KEYS = {
    "rho": float, "alpha": float, "reps": int, "seed": int,
    "delta_min": float, "delta_max": float, "delta_step": float,
    "methods": str, "workers": int, "c_override": float,
    "out_dir": str, "plot": lambda v: v.strip().lower() in ("1", "true", "yes"),
}


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
              default=None, help="key=value configuration file; explicit flags take precedence.")
@click.option("--rho", type=float, default=None)
@click.option("--alpha", type=float, default=None)
@click.option("--reps", type=int, default=None, help="Replications per grid point.")
@click.option("--seed", type=int, default=None, help="Stream seed; runs are bit-reproducible.")
@click.option("--delta-min", type=float, default=None)
@click.option("--delta-max", type=float, default=None)
@click.option("--delta-step", type=float, default=None)
@click.option("--methods", type=str, default=None,
              help=f"Comma-separated subset of {','.join(METHODS)}.")
@click.option("--workers", type=int, default=None,
              help=f"Thread workers (capped by ${_ENV_THREAD_CAP}).")
@click.option("--c-override", type=float, default=None,
              help="Force the adaptive interval's critical value instead of solving.")
@click.option("--out-dir", type=click.Path(file_okay=False), default=None)
@click.option("--plot/--no-plot", "plot_flag", default=None,
              help="Render coverage/length figures next to the CSV (default on).")
def simulate(config_path, rho, alpha, reps, seed, delta_min, delta_max, delta_step,
             methods, workers, c_override, out_dir, plot_flag) -> None:
    """Run the Monte Carlo coverage/length experiment and write plot-ready CSV."""
    settings = {
        "rho": 0.0, "alpha": 0.05, "reps": 100_000, "seed": 0,
        "delta_min": -4.0, "delta_max": 10.0, "delta_step": 0.25,
        "methods": ",".join(METHODS), "workers": 1, "c_override": None,
        "out_dir": ".", "plot": True,
    }
    if config_path is not None:
        try:
            raw = read_key_value_config(config_path)
        except ValueError as exc:
            raise click.ClickException(str(exc))
        for key, value in raw.items():
            if key not in _CONFIG_KEYS:
                raise click.ClickException(f"unknown configuration key {key!r}")
            settings[key] = _CONFIG_KEYS[key](value)
    overrides = {
        "rho": rho, "alpha": alpha, "reps": reps, "seed": seed,
        "delta_min": delta_min, "delta_max": delta_max, "delta_step": delta_step,
        "methods": methods, "workers": workers, "c_override": c_override,
        "out_dir": out_dir, "plot": plot_flag,
    }
    for key, value in overrides.items():
        if value is not None:
            settings[key] = value

    n = int(round((settings["delta_max"] - settings["delta_min"]) / settings["delta_step"]))
    grid = tuple(settings["delta_min"] + i * settings["delta_step"] for i in range(n + 1))
    try:
        config = ExperimentConfig(
            rho=settings["rho"],
            alpha=settings["alpha"],
            delta_grid=grid,
            replications=settings["reps"],
            seed=settings["seed"],
            methods=tuple(m.strip() for m in settings["methods"].split(",") if m.strip()),
            workers=_capped_workers(int(settings["workers"])),
            c_override=settings["c_override"],
        )
        points = run_experiment(config)
    except (ValueError, RuntimeError) as exc:
        raise click.ClickException(str(exc))

    out_base = Path(settings["out_dir"])
    out_base.mkdir(parents=True, exist_ok=True)
    stem = f"rho{config.rho:+.2f}_alpha{config.alpha:.3f}"
    csv_path = out_base / f"curves_{stem}.csv"
    lines = ["delta,method,coverage,coverage_se,excess_length,length_se"]
    for p in points:
        lines.append(",".join([
            _fmt(p.delta, 6), p.method, _fmt(p.coverage), _fmt(p.coverage_se, 6),
            _fmt(p.expected_excess_length), _fmt(p.length_se, 6),
        ]))
    csv_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    click.echo(str(csv_path))

    if settings["plot"]:
        from .figures import save_coverage_figure, save_length_figure

        title = f"rho={config.rho:+.2f}, alpha={config.alpha:g}"
        cov_path = save_coverage_figure(points, config.alpha,
                                        out_base / f"coverage_{stem}.png", title=title)
        len_path = save_length_figure(points, out_base / f"length_{stem}.png", title=title)
        click.echo(str(cov_path))
        click.echo(str(len_path))


@main.command()
@click.option("--table", "table_path", type=click.Path(exists=True, dir_okay=False),
              default=None, help="Reference table CSV (bundled data used by default).")
@click.option("--out", type=click.Path(dir_okay=False), default=None,
              help="Problem file to write (stdout by default).")
@click.option("--alpha", type=float, default=0.05, show_default=True)
@click.option("--seed", type=int, default=0, help=_SEED_HELP)
def backout(table_path: str | None, out: str | None, alpha: float, seed: int) -> None:
    """Recover standard errors from published interval endpoints."""
    try:
        rows = load_reference_table(table_path)
        results = backout_standard_errors(rows, alpha=alpha)
    except (ValueError, KeyError, RuntimeError) as exc:
        raise click.ClickException(str(exc))

    flagged = [r for r in results if not r.ok]
    problems = [r.problem for r in results if r.ok]
    for r in flagged:
        click.echo(f"flagged: {r.row.label}: {r.reason}", err=True)

    if out is None:
        writer = csv.writer(sys.stdout)
        writer.writerow(["label", "theta_L", "theta_U", "se_L", "se_U",
                         "rho", "alpha", "rho_known_zero"])
        for p in problems:
            writer.writerow([p.label, repr(p.theta_L_hat), repr(p.theta_U_hat),
                             repr(p.se_L), repr(p.se_U), repr(p.rho_hat),
                             repr(p.alpha), "1" if p.rho_known_zero else "0"])
    else:
        write_problem_file(out, problems)
    if flagged:
        raise click.exceptions.Exit(1)


if __name__ == "__main__":
    main()
