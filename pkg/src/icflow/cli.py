"""Command line front end: ``icflow {flow,audit,converge,identities}``.

Exit codes: 0 ok, 2 flow breakdown, 64 usage error, otherwise the number
of failed verdicts (capped at 125).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import functionals as fn
from .exceptions import FlowBreakdown, IcflowError
from .flow import SERIES_HELP, FlowState, run
from .geometry import RadialProfile, is_centered_sphere, make_profile, write_profile_csv
from .verify import (
    available_flow_checks,
    bounded,
    convergence_order,
    equality_case,
    exit_code,
    flow_checks,
    identity_fuzz,
    inequality_tolerance,
    nonnegative,
    verdicts_to_json,
)

EXIT_OK, EXIT_BREAKDOWN, EXIT_USAGE = 0, 2, 64
ROUNDOFF_FLOOR = 1e-12
MIN_RESIDUAL_ORDER = 2.0
FAMILY_PARAMS = {"sphere": ("R",), "spheroid": ("a", "c"), "legendre_bump": ("R", "eps", "n")}


class UsageError(Exception):
    pass


@dataclass
class ExperimentConfig:
    m: int = 2
    k: int = 1
    N: int = 64
    family: str = "sphere"
    R: float = 1.0
    a: float = 1.0
    c: float = 1.0
    eps: float = 0.0
    n: int = 2
    d: float = 0.0
    t_end: float = 1.0
    sample_every: float = 0.05
    c_stab: float = 0.4
    checks: list = field(default_factory=list)
    out: str = ""
    ladder: list = field(default_factory=lambda: [32, 64, 128])
    jobs: int = 1

    def validate(self):
        if self.m < 2:
            raise UsageError("m must be >= 2")
        if not 1 <= self.k <= self.m:
            raise UsageError("k must satisfy 1 <= k <= m")
        for N in [self.N] + list(self.ladder):
            if not _power_of_two(N) or not 32 <= N <= 1024:
                raise UsageError(f"N={N} must be a power of two in [32, 1024]")
        if self.family not in FAMILY_PARAMS:
            raise UsageError(f"unknown family {self.family!r}")
        if not self.t_end > 0 or not self.sample_every > 0:
            raise UsageError("t_end and sample_every must be positive")
        unknown = [c for c in self.checks if c not in available_flow_checks(self.m, self.k)]
        if unknown:
            raise UsageError(f"unknown checks for k={self.k}: {', '.join(unknown)}")

    def profile(self, N=None) -> RadialProfile:
        params = {p: getattr(self, p) for p in FAMILY_PARAMS[self.family]}
        try:
            return make_profile(self.family, self.m, N or self.N, self.d, **params)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc

    def out_dir(self) -> Path:
        path = Path(self.out or os.environ.get("ICF_OUTPUT_DIR", "icf_output"))
        path.mkdir(parents=True, exist_ok=True)
        return path


def _power_of_two(n):
    return isinstance(n, int) and n > 0 and n & (n - 1) == 0


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("surface and flow configuration")
    g.add_argument("--config", help="flat JSON config file; flags override its values")
    g.add_argument("--m", type=int, help="hypersurface dimension (surface in R^{m+1})")
    g.add_argument("--k", type=int, help="flow / curvature index, 1 <= k <= m")
    g.add_argument("--N", type=int, help="grid size, power of two in [32, 1024]")
    g.add_argument("--family", choices=sorted(FAMILY_PARAMS))
    g.add_argument("--R", type=float, help="sphere / bump radius")
    g.add_argument("--a", type=float, help="spheroid equatorial semi-axis")
    g.add_argument("--c", type=float, help="spheroid polar semi-axis")
    g.add_argument("--eps", type=float, help="Legendre bump amplitude")
    g.add_argument("--n", type=int, help="Legendre bump degree")
    g.add_argument("--d", type=float, help="axial offset of the origin O")
    g.add_argument("--out", help="output directory (default $ICF_OUTPUT_DIR or ./icf_output)")

    parser = _Parser(prog="icflow", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("flow", parents=[common], help="evolve a surface and check monotone quantities",
                       epilog=SERIES_HELP, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--t-end", dest="t_end", type=float)
    p.add_argument("--sample-every", dest="sample_every", type=float)
    p.add_argument("--c-stab", dest="c_stab", type=float, help="time-step safety factor (0.4)")
    p.add_argument("--checks", help="comma-separated verdict names (default: all for this k)")

    sub.add_parser("audit", parents=[common], help="evaluate integral identities and inequalities")

    p = sub.add_parser("converge", parents=[common], help="audit residuals over a refinement ladder")
    p.add_argument("--ladder", type=int, nargs="+")
    p.add_argument("--jobs", type=int, help="rungs evaluated concurrently")

    p = sub.add_parser("identities", help="random-spectrum algebra fuzz")
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--m-max", dest="m_max", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="output directory")
    return parser


def load_config(args) -> ExperimentConfig:
    values = {}
    if getattr(args, "config", None):
        try:
            with open(args.config) as fh:
                values.update(json.load(fh))
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config: {exc}") from exc
    for key, val in vars(args).items():
        if key in ("config", "command") or val is None:
            continue
        values[key] = val
    if isinstance(values.get("checks"), str):
        values["checks"] = [c for c in values["checks"].split(",") if c]
    known = ExperimentConfig.__dataclass_fields__
    unknown = sorted(set(values) - set(known))
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(unknown)}")
    cfg = ExperimentConfig(**values)
    try:
        cfg.validate()
    except TypeError as exc:
        raise UsageError(f"badly typed config value: {exc}") from exc
    return cfg


def _write(path: Path, text: str):
    path.write_text(text if text.endswith("\n") else text + "\n")


def _print_verdicts(verdicts):
    for v in verdicts:
        print(v.line())


def cmd_flow(cfg: ExperimentConfig) -> int:
    out = cfg.out_dir()
    profile = cfg.profile()
    state = FlowState(profile, 0.0, cfg.k)
    try:
        series, final = run(state, cfg.t_end, cfg.sample_every, c_stab=cfg.c_stab)
    except FlowBreakdown as exc:
        if exc.series is not None:
            exc.series.to_csv(out / "series.csv")
            if len(exc.series):
                _write(out / "snapshot_last_row.json", json.dumps(exc.series.last(), sort_keys=True))
        if exc.state is not None:
            write_profile_csv(exc.state.profile, out / "snapshot_profile.csv")
        print(f"BREAKDOWN {exc}", file=sys.stderr)
        return EXIT_BREAKDOWN
    series.to_csv(out / "series.csv")
    write_profile_csv(final.profile, out / "final_profile.csv")
    verdicts = flow_checks(series, cfg.m, cfg.k, cfg.N, cfg.checks or None)
    _write(out / "verdicts.json", verdicts_to_json(verdicts))
    _print_verdicts(verdicts)
    return exit_code(verdicts)


def audit_verdicts(report: fn.SurfaceReport, profile: RadialProfile) -> list:
    """Verdicts for every identity and inequality carried by ``report``."""
    N, k = report.N, report.k
    flat = report.flat()
    verdicts = []
    for label, res in sorted(report.residuals.items()):
        tol = inequality_tolerance(N, report.scales[label])
        verdicts.append(bounded(f"residual:{label}", res, tol))
    for label, gap in sorted(report.gaps.items()):
        if label == "ros_gap" or label == "quermass_gap" or label.startswith("theorem2"):
            tol = inequality_tolerance(N, report.scales[label])
            verdicts.append(nonnegative(f"inequality:{label}", gap, tol))
    surf = fn.evaluate(profile)
    for kk in range(1, report.m + 1):
        if np.all(surf.sigma[:, kk] > 0):
            lower_ok = all(np.all(surf.sigma[:, l] > 0) for l in range(1, kk + 1))
            verdicts.append(bounded(f"positivity:sigma_le_{kk}", 0.0 if lower_ok else 1.0, 0.0))
    if report.sigma_positive_up_to >= 1:
        ok = fn.positivity_scan(surf, report.sigma_positive_up_to).newton_spectra_positive
        verdicts.append(bounded("positivity:newton_spectra", 0.0 if ok else 1.0, 0.0))
    centered = is_centered_sphere(profile) and abs(profile.d) <= 1e-9 * profile.rho.mean()
    for label in sorted(flat):
        if label.startswith("theorem2") or label == "ros_gap":
            detected = equality_case(report, label).passed
            ok = detected == (centered if label.startswith("theorem2") else is_centered_sphere(profile))
            verdicts.append(bounded(f"equality_iff:{label}", 0.0 if ok else 1.0, 0.0,
                                    detected=detected))
    return verdicts


def cmd_audit(cfg: ExperimentConfig) -> int:
    out = cfg.out_dir()
    profile = cfg.profile()
    report = fn.surface_report(profile, cfg.k)
    if report.sigma_positive_up_to < cfg.k:
        print(f"warning: sigma_{cfg.k} is not positive everywhere; k-dependent checks skipped",
              file=sys.stderr)
    verdicts = audit_verdicts(report, profile)
    payload = {"report": report.flat(), "verdicts": json.loads(verdicts_to_json(verdicts))}
    _write(out / "report.json", json.dumps(payload, indent=1, sort_keys=True))
    _print_verdicts(verdicts)
    return exit_code(verdicts)


def _rung(args):
    cfg, N = args
    return N, fn.surface_report(cfg.profile(N), cfg.k)


def convergence_study(cfg: ExperimentConfig):
    """Residual orders and gap differences across ``cfg.ladder``."""
    ladder = sorted(set(cfg.ladder))
    jobs = [(cfg, N) for N in ladder]
    if cfg.jobs > 1:
        with ProcessPoolExecutor(cfg.jobs) as pool:
            reports = dict(pool.map(_rung, jobs))
    else:
        reports = dict(map(_rung, jobs))
    orders = {}
    for label in sorted(reports[ladder[-1]].residuals):
        errors = {N: abs(reports[N].residuals[label]) / reports[N].scales[label] for N in ladder}
        orders[label] = {"order": convergence_order(errors, ROUNDOFF_FLOOR),
                         "relative_residuals": {str(N): errors[N] for N in ladder}}
    gaps = {}
    for label in sorted(reports[ladder[-1]].gaps):
        vals = [reports[N].gaps.get(label, math.nan) for N in ladder]
        gaps[label] = {"values": {str(N): v for N, v in zip(ladder, vals)},
                       "successive_differences": [abs(b - a) for a, b in zip(vals, vals[1:])]}
    return orders, gaps


def cmd_converge(cfg: ExperimentConfig) -> int:
    if len(set(cfg.ladder)) < 3:
        raise UsageError("a ladder needs at least three resolutions")
    out = cfg.out_dir()
    orders, gaps = convergence_study(cfg)
    verdicts = [
        nonnegative(f"order:{label}", entry["order"] - MIN_RESIDUAL_ORDER, 0.0,
                    order=entry["order"])
        for label, entry in orders.items()
    ]
    payload = {"orders": orders, "gaps": gaps, "ladder": sorted(set(cfg.ladder)),
               "verdicts": json.loads(verdicts_to_json(verdicts))}
    _write(out / "orders.json", json.dumps(payload, indent=1, sort_keys=True))
    _print_verdicts(verdicts)
    return exit_code(verdicts)


def cmd_identities(args) -> int:
    if args.samples < 1 or args.m_max < 1:
        raise UsageError("samples and m-max must be positive")
    verdicts = identity_fuzz(args.samples, args.m_max, args.seed)
    out = Path(args.out or os.environ.get("ICF_OUTPUT_DIR", "icf_output"))
    out.mkdir(parents=True, exist_ok=True)
    _write(out / "verdicts.json", verdicts_to_json(verdicts))
    _print_verdicts(verdicts)
    return exit_code(verdicts)


COMMANDS = {"flow": cmd_flow, "audit": cmd_audit, "converge": cmd_converge}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "identities":
            return cmd_identities(args)
        cfg = load_config(args)
        return COMMANDS[args.command](cfg)
    except UsageError as exc:
        print(f"icflow: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except IcflowError as exc:
        print(f"icflow: {exc}", file=sys.stderr)
        return EXIT_BREAKDOWN


if __name__ == "__main__":
    sys.exit(main())
