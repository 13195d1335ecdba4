"""Command-line front end.

    parity-kicks {curves,sweep,wigner,validate,revival,all} [--config PATH]
                 [--out DIR] [--set KEY=VALUE ...] [--threads N]

Exit status: 0 success, 1 usage or parameter error, 2 numerical-integrity failure.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

from . import experiments as ex
from . import observables as obs
from .model import ParameterError, coerce_value, load_config, resolve_config
from .propagator import IntegrityError

log = logging.getLogger("parity_kicks")

SUBCOMMANDS = ("curves", "sweep", "wigner", "validate", "revival", "all")
OUT_ENV = "PARITY_KICKS_OUT"

EXIT_OK, EXIT_USAGE, EXIT_INTEGRITY = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse would exit(2); 2 is reserved
        raise UsageError(message)


@dataclass
class CliInvocation:
    subcommand: str
    config_path: Path | None
    out_dir: Path
    overrides: dict[str, Any] = field(default_factory=dict)
    threads: int = 0
    resolved: dict[str, Any] = field(default_factory=dict)


def _build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="parity-kicks", description="Parity-kick decoherence control simulations.")
    p.add_argument("subcommand", choices=SUBCOMMANDS)
    p.add_argument("--config", type=Path, help="flat JSON parameter file")
    p.add_argument("--out", type=Path, help=f"output directory (fallback ${OUT_ENV}, then ./out)")
    p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                   help="override one config key; repeatable")
    p.add_argument("--threads", type=int, default=0, help="worker threads, 0 = auto")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def parse_args(argv: Sequence[str]) -> CliInvocation:
    """Resolve flags into an invocation: overrides > config file > defaults."""
    ns = _build_parser().parse_args(list(argv))
    if ns.threads < 0:
        raise UsageError("--threads must be >= 0")
    overrides: dict[str, Any] = {}
    for item in ns.overrides:
        key, sep, value = item.partition("=")
        key = key.strip()
        if not sep or not key:
            raise UsageError(f"malformed override {item!r}, expected KEY=VALUE")
        try:
            v = coerce_value(key, value.strip())
        except ParameterError as exc:
            raise UsageError(str(exc)) from None
        if key in overrides and overrides[key] != v:
            raise UsageError(f"conflicting overrides for {key!r}")
        overrides[key] = v
    file_cfg: dict[str, Any] = {}
    if ns.config is not None:
        if not ns.config.is_file():
            raise UsageError(f"config file not found: {ns.config}")
        try:
            file_cfg = load_config(ns.config)
        except ParameterError as exc:
            raise UsageError(str(exc)) from None
    out = ns.out or Path(os.environ.get(OUT_ENV) or "out")
    inv = CliInvocation(ns.subcommand, ns.config, out, overrides, ns.threads)
    inv.resolved = resolve_config(file_cfg, overrides)
    if ns.verbose:
        logging.basicConfig(level=logging.INFO, format="%(message)s")
    return inv


def _summarize_curves(series: Sequence[ex.CurveSeries]) -> None:
    for s in series:
        parts = []
        for gt in (0.5, 1.0, 3.0):
            if s.x and s.x[0] <= gt <= s.x[-1] + 1e-9:
                y, t = s.y_at(gt)
                parts.append(f"eta({gt:g}/gamma)={y:.4f} [t={t:.4f}]")
        print(f"curves {s.label}: " + " ".join(parts))


def dispatch(inv: CliInvocation) -> int:
    """Run the requested scenario(s), write artifacts and print a summary."""
    config = ex.ScenarioConfig.from_flat(inv.resolved, threads=inv.threads, out_dir=inv.out_dir)
    sim = ex.Simulation(config)
    out = inv.out_dir
    wanted = SUBCOMMANDS[:-1] if inv.subcommand == "all" else (inv.subcommand,)
    manifest: dict[str, Any] = {"subcommand": inv.subcommand, "out_dir": str(out),
                                "config_path": str(inv.config_path or "")}
    manifest.update(config.manifest())
    manifest["omega_c"] = sim.bath.omega_c
    manifest["n_modes"] = sim.bath.n_modes

    # compute everything first so a failure leaves no partial artifact set
    artifacts: list[tuple[Any, Path]] = []
    start = time.perf_counter()
    if "curves" in wanted:
        series = ex.run_decoherence_curves(config, sim)
        artifacts.append((series, out / "curves.csv"))
        _summarize_curves(series)
    if "sweep" in wanted:
        series = ex.run_kick_period_sweep(config, sim)
        artifacts.append((series, out / "sweep.csv"))
        for s in series:
            lo = max(y for x, y in zip(s.x, s.y) if x <= 0.5) if s.x[0] <= 0.5 else float("nan")
            hi = min(y for x, y in zip(s.x, s.y) if x >= 4) if s.x[-1] >= 4 else float("nan")
            print(f"sweep {s.label}: max eta(wcT/2pi<=0.5)={lo:.4f} min eta(wcT/2pi>=4)={hi:.4f}")
    if "wigner" in wanted:
        for grid in ex.run_wigner_snapshots(config, sim):
            artifacts.append((grid, out / f"wigner_{grid.label}.csv"))
            vis = obs.fringe_visibility(grid)
            manifest[f"wigner_{grid.label}_visibility"] = vis
            manifest[f"wigner_{grid.label}_D"] = grid.D
            print(f"wigner {grid.label}: W(0)={grid.at(0j):.6f} visibility={vis:.4f} "
                  f"integral={grid.integral():.6f} D={grid.D:.4e}")
    if "validate" in wanted:
        rep = ex.run_markov_validation(config, sim)
        manifest.update({"markov_max_eta_dev": rep.max_eta_dev,
                         "markov_max_alpha_dev": rep.max_alpha_dev,
                         "markov_passed": rep.passed})
        status = "PASS" if rep.passed else ("MISMATCH (decoupled bath)" if not rep.coupled else "FAIL")
        print(f"validate: max|eta-eta_Mark|={rep.max_eta_dev:.5f} "
              f"max||alpha|-|alpha_Mark||/|alpha0|={rep.max_alpha_dev:.5f} "
              f"over {rep.n_samples} samples, tolerance {rep.tolerance} -> {status}")
    if "revival" in wanted:
        rep = ex.run_revival_check(config, sim)
        manifest.update({"revival_t_rev": rep.t_rev, "revival_max_ratio": rep.max_ratio,
                         "revival_t_at_max": rep.t_at_max, "revival_ratio_half": rep.ratio_half})
        print(f"revival: T_rev={rep.t_rev:.4f} max|alpha|/|alpha0| in [0.9,1.1]T_rev="
              f"{rep.max_ratio:.4f} at t={rep.t_at_max:.4f}; at T_rev/2: {rep.ratio_half:.3e}")
    manifest["max_unitarity_error"] = sim.max_unitarity_error
    manifest["n_propagators"] = sim.n_propagators
    log.info("computed in %.2f s", time.perf_counter() - start)

    for data, path in artifacts:
        ex.write_csv(data, path)
    ex.write_manifest(manifest, out / "manifest.json")
    print(f"wrote {len(artifacts)} CSV file(s) and manifest.json to {out}")
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        inv = parse_args(argv)
    except UsageError as exc:
        _build_parser().print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return dispatch(inv)
    except IntegrityError as exc:
        print(f"numerical integrity failure: {exc}", file=sys.stderr)
        return EXIT_INTEGRITY
    except ParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
