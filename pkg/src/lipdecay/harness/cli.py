"""Command line interface: ``lipdecay train|sweep|verify|plot``.

Exit codes: 0 success, 1 configuration or usage error, 2 runtime failure,
3 a verified inequality failed.
"""

from __future__ import annotations

import json
import sys
import warnings
from pathlib import Path

import click
import numpy as np

from ..bounds import BoundInputs, audit_columns, lipschitz_bound_rhs
from ..linalg import make_rng
from ..rates import RateFunction
from ..trainer import STREAM_DATA, read_log_csv, train as run_training
from .config import ConfigError, load_config
from .plots import emit_plots
from .sweep import run_sweep
from .targets import generate_dataset

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME, EXIT_VERIFY = 0, 1, 2, 3
AUDIT_MODES = ("decay_cap", "hybrid_min")


class RuntimeFailure(Exception):
    pass


class VerifyFailure(Exception):
    pass


@click.group()
def cli():
    """Train two-layer networks under learning-rate decay and audit the Lipschitz bounds."""


@cli.command()
@click.option("--config", "config_path", required=True, type=click.Path(dir_okay=False))
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
def train(config_path, out_dir):
    """Train one network and write log_seed<k>.csv plus a JSON sidecar."""
    cfg = load_config(config_path)
    data = generate_dataset(cfg.data.target, cfg.data.noise, cfg.data.N,
                            make_rng(cfg.train.seed, STREAM_DATA))
    try:
        log = run_training(cfg.train, data)
    except (ArithmeticError, np.linalg.LinAlgError) as exc:
        raise RuntimeFailure(f"training failed: {exc}") from exc
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / f"log_seed{cfg.train.seed}.csv"
    log.write(csv_path)
    (out / "config.json").write_text(json.dumps(cfg.raw, indent=2))
    last = log.records[-1]
    click.echo(f"wrote {csv_path} ({len(log.records)} rows); final lip_bound={last.lip_bound:.6g} "
               f"mse_risk={last.mse_risk:.6g}")


@cli.command()
@click.option("--config", "config_path", required=True, type=click.Path(dir_okay=False))
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
def sweep(config_path, out_dir):
    """Run a multi-seed sweep over N, p, P or beta and write aggregate.csv."""
    spec = load_config(config_path).sweep_spec()
    result = run_sweep(spec)
    agg = result.write(out_dir)
    n_cells = len(result.cells)
    for c in result.failed:
        click.echo(f"cell failed: arm={c.arm} {spec.axis}={c.value} seed={c.seed}: {c.error}", err=True)
    if len(result.failed) == n_cells:
        raise RuntimeFailure("every sweep cell failed")
    click.echo(f"wrote {agg} ({n_cells - len(result.failed)}/{n_cells} cells ok)")


def _find_logs(path: Path) -> list[Path]:
    if path.is_file():
        return [path]
    if path.is_dir():
        return sorted(path.rglob("log_seed*.csv"))
    raise ConfigError(f"{path}: no such file or directory")


def audit_log_file(csv_path: Path):
    """Audit one CSV log against the configuration stored in its JSON sidecar.

    Returns ``None`` for logs whose mode carries no cap guarantees.
    """
    side_path = csv_path.with_suffix(".json")
    try:
        side = json.loads(side_path.read_text())
        sch = side["config"]["scheduler"]
        rate = RateFunction.from_dict(sch["rate"])
        N, L_sigma = int(side["N"]), float(side["L_sigma"])
    except (OSError, json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"{side_path}: unreadable sidecar ({exc})") from exc
    if sch["mode"] not in AUDIT_MODES:
        return None
    try:
        cols = read_log_csv(csv_path)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"{csv_path}: {exc}") from exc
    report = audit_columns(cols, C_W=sch["C_W"], C_B=sch["C_B"], C_b=sch["C_b"], C_c=sch["C_c"],
                           rate=rate, N=N, L_sigma=L_sigma)
    cfg = side["config"]
    T = int(cols["t"][-1]) if len(cols["t"]) else 0
    report.lip_bound_rhs = lipschitz_bound_rhs(BoundInputs(
        L_sigma=L_sigma, p=cfg["p"], d=cfg["d"], C_W=sch["C_W"], C_B=sch["C_B"], N=N,
        G_T=rate.G(max(T, 1)), g_1=rate.g(1), kappa=cfg["kappa"], eta=cfg["eta"]))
    return report


@cli.command()
@click.option("--log", "log_path", required=True, type=click.Path())
def verify(log_path):
    """Audit every log under a directory (or one CSV) and write bound_report.json."""
    path = Path(log_path)
    logs = _find_logs(path)
    reports, skipped = {}, []
    for f in logs:
        rep = audit_log_file(f)
        if rep is None:
            skipped.append(str(f))
        else:
            reports[str(f)] = rep
    if not reports:
        raise ConfigError(f"{path}: no decay_cap or hybrid_min logs to verify")
    families = {}
    for rep in reports.values():
        for name, fam in rep.families.items():
            prev = families.get(name)
            families[name] = (
                (prev[0] and fam.passed) if prev else fam.passed,
                min(prev[1], fam.worst_slack) if prev else fam.worst_slack,
            )
    passed = all(ok for ok, _ in families.values())
    out_dir = path if path.is_dir() else path.parent
    (out_dir / "bound_report.json").write_text(json.dumps({
        "passed": passed,
        "families": {k: {"passed": ok, "worst_slack": s} for k, (ok, s) in families.items()},
        "logs": {k: r.to_dict() for k, r in reports.items()},
        "skipped": skipped,
    }, indent=2, default=float))
    for name, (ok, slack) in families.items():
        click.echo(f"{name:<14} {'PASS' if ok else 'FAIL'}  worst_slack={slack:.3e}  ({len(reports)} logs)")
    if skipped:
        click.echo(f"skipped {len(skipped)} logs without cap guarantees")
    if not passed:
        raise VerifyFailure("verification failed")


@cli.command()
@click.option("--in", "in_path", required=True, type=click.Path())
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
def plot(in_path, out_dir):
    """Render aggregate.csv as SVG figures."""
    src = Path(in_path)
    csv_path = src / "aggregate.csv" if src.is_dir() else src
    if not csv_path.is_file():
        raise ConfigError(f"{csv_path}: not found")
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            paths = emit_plots(csv_path, out_dir)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    for w in caught:
        click.echo(f"warning: {w.message}", err=True)
    click.echo(f"wrote {len(paths)} SVG files to {out_dir}")


def cli_main(argv=None) -> int:
    """Run the CLI on ``argv`` and return the exit code instead of exiting."""
    try:
        cli.main(args=list(argv) if argv is not None else None, prog_name="lipdecay", standalone_mode=False)
    except click.UsageError as exc:
        exc.show()
        return EXIT_CONFIG
    except click.Abort:
        return EXIT_RUNTIME
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        return EXIT_CONFIG
    except VerifyFailure as exc:
        click.echo(f"FAIL: {exc}", err=True)
        return EXIT_VERIFY
    except Exception as exc:  # noqa: BLE001 - anything else is a runtime failure
        click.echo(f"runtime failure: {exc}", err=True)
        return EXIT_RUNTIME
    return EXIT_OK


def main():
    sys.exit(cli_main())
