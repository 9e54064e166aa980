"""Command-line scenario runner: ``genschro run|spectrum|check <config>``.

Exit status: 0 on success, 1 on a numerical failure or a failed check, 2 on a
configuration or usage error. A configuration error never creates output files.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import warnings
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .checks import run_invariant_suite, suite_passed
from .config import ScenarioConfig, load_config
from .errors import GenSchroError, UsageError
from .evolution import run
from .operators import assemble_hamiltonian
from .spectral import hermitian_seed_shift, lowest_eigenpairs, reality_tolerance

SNAPSHOT_COLUMNS = ("step", "t", "x", "psi_re", "psi_im", "phi_re", "phi_im", "rho", "j", "hdens", "sflux", "pdens")
SPECTRUM_COLUMNS = ("n", "re_E", "im_E", "residual", "flag")

EXIT_OK, EXIT_FAILURE, EXIT_CONFIG = 0, 1, 2


def _number(value):
    """JSON-safe scalar; non-finite values become explicit flags."""
    if isinstance(value, complex):
        return {"re": _number(value.real), "im": _number(value.imag)}
    value = float(value)
    if math.isfinite(value):
        return value
    return "nan" if math.isnan(value) else "overflow"


class _PartialFiles:
    """Open ``name.partial`` files and rename them into place on success."""

    def __init__(self, directory: Path, names):
        self.paths = {name: directory / name for name in names}
        self.handles = {}

    def open(self, name):
        handle = open(str(self.paths[name]) + ".partial", "w", encoding="utf-8", newline="\n")
        self.handles[name] = handle
        return handle

    def commit(self):
        for name, handle in self.handles.items():
            handle.close()
            os.replace(str(self.paths[name]) + ".partial", self.paths[name])

    def abort(self):
        for handle in self.handles.values():
            handle.close()


def _prepare(path):
    """Load the config and build every input so that errors surface before any file is written."""
    config = load_config(path)
    grid = config.grid()
    return config, grid, config.mu(), config.potential(), config.constants()


def _output_dir(config: ScenarioConfig, config_path, override) -> Path:
    if override:
        return Path(override)
    out = Path(config.output_dir)
    return out if out.is_absolute() else Path(config_path).parent / out


def cmd_run(config_path, output_dir=None) -> int:
    try:
        config, grid, mu, potential, constants = _prepare(config_path)
        assemble_hamiltonian(grid, mu, potential, constants, form=config.form)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            initial = config.initial_state(grid)
    except GenSchroError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = _output_dir(config, config_path, output_dir)
    out.mkdir(parents=True, exist_ok=True)
    files = _PartialFiles(out, ("snapshots.csv", "report.json", "summary.txt"))
    fmt = f".{config.precision}g"
    csv = files.open("snapshots.csv")
    csv.write(",".join(SNAPSHOT_COLUMNS) + "\n")
    x = grid.nodes

    def write_snapshot(n, state, snap):
        cols = (
            x, state.psi.real, state.psi.imag, state.phi.real, state.phi.imag,
            snap.rho, snap.j, snap.hdens, snap.sflux, snap.pdens,
        )
        t = format(state.t, fmt)
        for k in range(grid.size):
            csv.write(f"{n},{t}," + ",".join(format(c[k], fmt) for c in cols) + "\n")

    try:
        result = run(
            initial, grid, mu, potential, constants, config.dt, config.steps,
            snapshot_every=config.snapshot_every, form=config.form,
            enforce_pt=config.enforce_pt, on_snapshot=write_snapshot, collect=False,
        )
    except (GenSchroError, FloatingPointError) as exc:
        files.abort()
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    report = result.report
    summary = report.summary()
    notes = [str(w.message) for w in caught] + report.warnings
    payload = {
        "generated": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "config": config.as_dict(),
        "records": [
            {k: _number(v) if k not in ("step",) else v for k, v in vars(r).items()} for r in report.records
        ],
        "summary": {k: _number(v) for k, v in summary.items()},
        "warnings": notes,
    }
    json.dump(payload, files.open("report.json"), indent=2)
    lines = [f"{k} = {format(v, '.6e')}" for k, v in summary.items()]
    lines += [f"final energy = {report.records[-1].energy:.12g}", f"records = {len(report.records)}"]
    lines += [f"warning: {w}" for w in notes]
    files.open("summary.txt").write("\n".join(lines) + "\n")
    files.commit()
    print("\n".join(lines))
    return EXIT_OK


def cmd_spectrum(config_path, output_dir=None) -> int:
    try:
        config, grid, mu, potential, constants = _prepare(config_path)
        H = assemble_hamiltonian(grid, mu, potential, constants, form=config.form)
    except GenSchroError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            shift = hermitian_seed_shift(grid, potential, constants)
            result = lowest_eigenpairs(H, config.spectral_k, shift=shift, grid=grid)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except GenSchroError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    out = _output_dir(config, config_path, output_dir)
    out.mkdir(parents=True, exist_ok=True)
    files = _PartialFiles(out, ("spectrum.csv",))
    fh = files.open("spectrum.csv")
    fh.write(",".join(SPECTRUM_COLUMNS) + "\n")
    fmt = f".{config.precision}g"
    for n, (E, res, flag) in enumerate(zip(result.eigenvalues, result.residuals, result.flags)):
        fh.write(f"{n},{format(E.real, fmt)},{format(E.imag, fmt)},{format(res, fmt)},{flag}\n")
    files.commit()
    for n, (E, flag) in enumerate(zip(result.eigenvalues, result.flags)):
        print(f"{n:3d}  {E.real: .10f} {E.imag:+.3e}i  {flag} (tol {reality_tolerance(E):.1e})")
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    return EXIT_OK


def cmd_check(config_path) -> int:
    try:
        config, *_ = _prepare(config_path)
    except GenSchroError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            results = run_invariant_suite(config)
    except GenSchroError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    for r in results:
        print(r.line())
    passed = suite_passed(results)
    ran = [r for r in results if not r.skipped]
    print(f"{sum(r.passed for r in ran)}/{len(ran)} checks passed, {len(results) - len(ran)} skipped")
    return EXIT_OK if passed else EXIT_FAILURE


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="genschro", description="Generalized-momentum PT-symmetric Schroedinger lab")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("run", help="evolve the field pair and write snapshots")
    p.add_argument("config")
    p.add_argument("--output-dir", default=None)
    p = sub.add_parser("spectrum", help="lowest eigenpairs of the configured Hamiltonian")
    p.add_argument("config")
    p.add_argument("--output-dir", default=None)
    p = sub.add_parser("check", help="run the invariant suite")
    p.add_argument("config")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    with np.errstate(all="ignore"):  # overflow is detected and reported by the run loop
        if args.command == "run":
            return cmd_run(args.config, args.output_dir)
        if args.command == "spectrum":
            return cmd_spectrum(args.config, args.output_dir)
        return cmd_check(args.config)


if __name__ == "__main__":
    sys.exit(main())
