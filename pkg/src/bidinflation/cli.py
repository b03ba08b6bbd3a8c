"""Command-line entry point: ``bidinflation <command> [flags]``.

Exit codes: 0 when every check passes, 1 when a bound or verifier fails,
2 for usage errors (bad flags, unparsable curves or mechanisms, missing
files).  A ``--config`` JSON file may supply any flag by its long name
(dashes or underscores); flags given on the command line win.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path

from bidinflation import bounds, report, search, testbeds
from bidinflation import revenue as rev
from bidinflation.curves import CurveError, TriangleCurve, parse_curve
from bidinflation.mechanisms import (
    MechanismError,
    MixedInflatedSPA,
    RandomizedPostTheSample,
    parse_mechanism,
)
from bidinflation.montecarlo import estimate_revenue
from bidinflation.quadrature import QuadratureConfig, QuadratureError


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str = ""
    target: str | None = None  # verify selector
    curve: str | None = None
    mech: str | None = None
    n: int | None = None
    step: float | None = None
    q_max: float | None = None
    trials: int = 1_000_000
    seed: int = 0
    threads: int = 1
    format: str = "markdown"
    out: str | None = None
    reports: str | None = None
    abs_tol: float = 1e-10
    rel_tol: float = 1e-9
    max_depth: int = 60
    epsilon_grid: list = field(default_factory=lambda: [i / 100 for i in range(101)])
    delta_grid: list = field(default_factory=lambda: [0.25 * i for i in range(1, 17)])

    def quadrature(self) -> QuadratureConfig:
        return QuadratureConfig(abs_tol=self.abs_tol, rel_tol=self.rel_tol,
                                max_depth=self.max_depth)


_SHARED = {
    "--curve": dict(type=str, help="curve: uniform, exponential:1, triangle:0.2, "
                    "ter:1,4, pl:0,0;0.5,1;1,0, a JSON document or a JSON file"),
    "--mech": dict(type=str, help="mechanism: spa, reserve:r, inflated:d, mixed:e,d, "
                   "pts[:alpha], rpts:zeta,rho,e,d"),
    "--n": dict(type=int, help="number of bidders"),
    "--step": dict(type=float, help="q* grid step"),
    "--q-max": dict(type=float, help="exclusive upper end of the q* grid"),
    "--trials": dict(type=int, help="Monte-Carlo trials"),
    "--seed": dict(type=int, help="random seed"),
    "--threads": dict(type=int, help="worker cap"),
    "--format": dict(choices=report.FORMATS, help="output format"),
    "--out": dict(type=str, help="output path (default: stdout)"),
    "--reports": dict(type=str, help="write bound reports as JSON lines to this path"),
    "--abs-tol": dict(type=float),
    "--rel-tol": dict(type=float),
    "--max-depth": dict(type=int),
    "--epsilon-grid": dict(type=str, help="comma-separated epsilon values"),
    "--delta-grid": dict(type=str, help="comma-separated delta values"),
    "--config": dict(type=str, help="JSON file of flag values"),
}


def build_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    for flag, kw in _SHARED.items():
        shared.add_argument(flag, default=None, **kw)
    parser = argparse.ArgumentParser(prog="bidinflation", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("ratio", parents=[shared], help="exact revenue, optimum, ratio and bounds")
    v = sub.add_parser("verify", parents=[shared], help="run a verifier")
    v.add_argument("target", choices=("thm31", "thm42", "lemmas", "bk"))
    sub.add_parser("scan", parents=[shared], help="exact ratio over the triangle family")
    sub.add_parser("optimize", parents=[shared], help="tune (epsilon, delta) of the mixed SPA")
    sub.add_parser("simulate", parents=[shared], help="Monte-Carlo estimate next to the exact value")
    return parser


def _grid(text):
    if isinstance(text, list):
        return [float(x) for x in text]
    try:
        return [float(x) for x in str(text).split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"cannot parse grid {text!r}") from None


def resolve_config(ns: argparse.Namespace) -> RunConfig:
    """Merge defaults, the ``--config`` file and explicit flags (in rising priority)."""
    values = {}
    if ns.config:
        path = Path(ns.config)
        if not path.is_file():
            raise UsageError(f"config file not found: {path}")
        try:
            doc = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise UsageError(f"{path}: {exc}") from None
        for key, val in doc.items():
            values[key.replace("-", "_")] = val
    for key, val in vars(ns).items():
        if val is not None and key != "config":
            values[key] = val
    known = RunConfig.__dataclass_fields__
    unknown = sorted(set(values) - set(known))
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(unknown)}")
    cfg = RunConfig(**values)
    cfg = replace(cfg, epsilon_grid=_grid(cfg.epsilon_grid), delta_grid=_grid(cfg.delta_grid))
    if cfg.format not in report.FORMATS:
        raise UsageError(f"format must be one of {report.FORMATS}")
    return cfg


def _curve(cfg, default="uniform"):
    text = cfg.curve or default
    try:
        return parse_curve(text)
    except FileNotFoundError as exc:
        raise UsageError(f"curve file not found: {exc.filename}") from None
    except (CurveError, ValueError) as exc:
        raise UsageError(f"bad curve {text!r}: {exc}") from None


def _mech(cfg, default="spa"):
    text = cfg.mech or default
    try:
        return parse_mechanism(text)
    except (MechanismError, ValueError) as exc:
        raise UsageError(f"bad mechanism {text!r}: {exc}") from None


def _n_for(spec, cfg):
    if cfg.n is not None:
        return cfg.n
    return 1 if spec.single_sample else 2


def _emit(text: str, cfg: RunConfig):
    if cfg.out:
        path = Path(cfg.out)
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(text)
        except OSError as exc:
            raise UsageError(f"cannot write {path}: {exc}") from None
    else:
        sys.stdout.write(text)


def _emit_reports(reps, cfg):
    if cfg.reports:
        Path(cfg.reports).write_text(report.to_jsonl(r.to_dict() for r in reps))


def _info(msg):
    print(msg, file=sys.stderr)


def _report_rows(reps):
    return [(r.name, r.kind, r.bound, r.exact, r.sound) for r in reps]


_REPORT_HEADER = ["bound", "kind", "value", "exact", "sound"]


# -- commands -------------------------------------------------------------------


def cmd_ratio(cfg: RunConfig) -> int:
    curve, spec = _curve(cfg), _mech(cfg)
    n = _n_for(spec, cfg)
    q = cfg.quadrature()
    try:
        mech_rev = rev.expected_revenue(spec, curve, n, q)
    except (ValueError, MechanismError) as exc:
        raise UsageError(str(exc)) from None
    opt_rev = rev.optimal_revenue(curve, n, q)
    r = rev.ratio(mech_rev, opt_rev)
    reps = bounds.curve_bound_reports(curve, max(n, 2), cfg=q)
    ok = all(rp.sound for rp in reps if rp.sound is not None)
    summary = {"curve": curve.to_dict(), "mechanism": spec.to_dict(), "n": n,
               "revenue": mech_rev, "optimal_revenue": opt_rev, "ratio": r,
               "all_bounds_sound": ok}
    if cfg.format == "json":
        summary["bounds"] = [rp.to_dict() for rp in reps]
        text = report.to_json(summary)
    elif cfg.format == "csv":
        rows = [("revenue", "", mech_rev, None, None), ("optimal_revenue", "", opt_rev, None, None),
                ("ratio", "", r, None, None)] + _report_rows(reps)
        text = report.to_csv(_REPORT_HEADER, rows)
    else:
        head = (f"{spec.label()} on {curve!r} with n={n}\n\n"
                f"revenue          {report.fmt_human(mech_rev)}\n"
                f"optimal revenue  {report.fmt_human(opt_rev)}\n"
                f"ratio            {report.fmt_human(r)}\n\n")
        text = head + report.to_markdown(_REPORT_HEADER, _report_rows(reps))
    _emit(text, cfg)
    _emit_reports(reps, cfg)
    for rp in reps:
        if rp.sound is False:
            _info(f"UNSOUND: {rp.name} bound {rp.bound!r} vs exact {rp.exact!r}")
    return 0 if ok else 1


def _verify_thm31(cfg, q):
    ns = [cfg.n] if cfg.n is not None else [2, 3, 4, 5]
    rows = []
    for n in ns:
        res = [bounds.theorem31_verify(n, q)]
        tuned = None
        if cfg.mech:
            spec = _mech(cfg)
            if not isinstance(spec, MixedInflatedSPA):
                raise UsageError("thm31 certifies a mixed inflated SPA (--mech mixed:e,d)")
            tuned = (spec.epsilon, spec.delta)
        elif n == 2:
            tuned = (0.15, 1.0)
        if tuned:
            res.append(bounds.theorem31_verify(n, q, epsilon=tuned[0], delta=tuned[1]))
        for t in res:
            rows.append((n, t.epsilon, t.delta, t.composite_min, t.worst_q_star,
                         t.certified_margin))
    header = ["n", "epsilon", "delta", "composite_min", "worst_q_star", "certified_margin"]
    return header, rows, {"margin": max(r[-1] for r in rows)}


def _verify_thm42(cfg):
    grid = bounds.Theorem42Grid()
    if cfg.step:
        grid = replace(grid, q_step=cfg.step)
    args = {}
    if cfg.mech:
        spec = _mech(cfg)
        if not isinstance(spec, RandomizedPostTheSample):
            raise UsageError("thm42 certifies a randomized post-the-sample (--mech rpts:...)")
        args = dict(zeta=spec.zeta, rho=spec.rho, epsilon=spec.epsilon, delta=spec.delta)
    try:
        res = bounds.theorem42_verify(grid=grid, **args)
    except bounds.HypothesisError as exc:
        raise UsageError(str(exc)) from None
    d = res.to_dict()
    header = ["case_a_min", "case_b_min", "case_c_min", "certified_margin", "grid_points"]
    return header, [[d[k] for k in header]], d


def _curves_for(cfg):
    if cfg.curve:
        return [_curve(cfg)]
    return testbeds.curve_matrix()


def _verify_lemmas(cfg, q):
    reps, rows, bad = [], [], 0
    for curve in _curves_for(cfg):
        n = cfg.n or 2
        cr = bounds.curve_bound_reports(curve, n, cfg=q)
        reps += cr
        viol = bounds.quant_bound_check(curve, 1.0)
        bad += sum(r.sound is False for r in cr) + len(viol)
        for v in viol[:1]:
            _info(f"quant bound fails on {curve!r} at q={v[1]!r}")
        rows.append((repr(curve), len(cr), sum(r.sound is False for r in cr), len(viol)))
    _emit_reports(reps, cfg)
    for rp in reps:
        if rp.sound is False:
            _info(f"UNSOUND: {rp.name} {rp.inputs} bound {rp.bound!r} vs exact {rp.exact!r}")
    header = ["curve", "bounds_checked", "unsound", "quant_violations"]
    return header, rows, {"failures": bad}


def _verify_bk(cfg, q):
    rows, bad = [], 0
    for curve in _curves_for(cfg):
        for n in ([cfg.n] if cfg.n else [1, 2, 3]):
            spa = rev.spa_revenue(curve, n + 1, q)
            opt = rev.optimal_revenue(curve, n, q)
            ok = bounds.bk_theorem_check(curve, n, q)
            bad += not ok
            rows.append((repr(curve), n, spa, opt, spa - opt, ok))
    header = ["curve", "n", "spa_n_plus_1", "optimal_n", "gap", "holds"]
    return header, rows, {"failures": bad}


def cmd_verify(cfg: RunConfig) -> int:
    q = cfg.quadrature()
    try:
        if cfg.target == "thm31":
            header, rows, extra = _verify_thm31(cfg, q)
        elif cfg.target == "thm42":
            header, rows, extra = _verify_thm42(cfg)
        elif cfg.target == "lemmas":
            header, rows, extra = _verify_lemmas(cfg, q)
        elif cfg.target == "bk":
            header, rows, extra = _verify_bk(cfg, q)
        else:
            raise UsageError(f"unknown verifier {cfg.target!r}")
    except bounds.VerificationError as exc:
        _info(f"FAIL {cfg.target}: {exc}")
        return 1
    _emit(report.render_table(header, rows, cfg.format, {"verifier": cfg.target, **extra}), cfg)
    if "margin" in extra or "certified_margin" in extra:
        m = extra.get("margin", extra.get("certified_margin"))
        _info(f"PASS {cfg.target}: certified margin {report.fmt_machine(m)}")
        return 0
    if extra.get("failures"):
        _info(f"FAIL {cfg.target}: {extra['failures']} failing checks")
        return 1
    _info(f"PASS {cfg.target}")
    return 0


def cmd_scan(cfg: RunConfig) -> int:
    spec = _mech(cfg, "mixed:0.15,1")
    n = _n_for(spec, cfg)
    scfg = search.SearchConfig(q_step=cfg.step or 1e-3, q_max=cfg.q_max or 1.0)
    res = search.scan_triangles(spec, n, scfg, cfg.quadrature())
    search.witness(spec, n, TriangleCurve(res.argmin), res.min_ratio, cfg.quadrature())
    if cfg.format == "json":
        text = report.to_json(res.to_dict())
    elif cfg.format == "csv":
        text = search.scan_to_csv(res)
    else:
        text = report.to_markdown(res.header(), res.rows())
    _emit(text, cfg)
    _info(f"min ratio {report.fmt_machine(res.min_ratio)} at q*={report.fmt_machine(res.argmin)}")
    return 0


def cmd_optimize(cfg: RunConfig) -> int:
    n = cfg.n or 2
    scfg = search.SearchConfig(q_step=cfg.step or 1e-2, q_max=cfg.q_max or 1.0)
    res = search.optimize_params(n, cfg.epsilon_grid, cfg.delta_grid, scfg, cfg.quadrature())
    search.witness(MixedInflatedSPA(res.epsilon, res.delta), n, TriangleCurve(res.worst_q_star),
                   res.worst_case_ratio, cfg.quadrature())
    header = ["epsilon", "delta", "worst_ratio", "worst_q_star"]
    summary = {k: v for k, v in res.to_dict().items() if k != "grid"}
    _emit(report.render_table(header, res.grid, cfg.format, summary), cfg)
    _info(f"best epsilon={res.epsilon:g} delta={res.delta:g} "
          f"worst-case ratio {report.fmt_machine(res.worst_case_ratio)}")
    return 0


def cmd_simulate(cfg: RunConfig) -> int:
    curve, spec = _curve(cfg), _mech(cfg)
    n = _n_for(spec, cfg)
    try:
        exact = rev.expected_revenue(spec, curve, n, cfg.quadrature())
        est = estimate_revenue(spec, curve, n, cfg.trials, seed=cfg.seed, threads=cfg.threads)
    except (ValueError, MechanismError) as exc:
        raise UsageError(str(exc)) from None
    z = (est.mean - exact) / est.stderr if est.stderr > 0 else 0.0
    header = ["mechanism", "curve", "n", "trials", "seed", "mc_mean", "mc_stderr", "analytic", "z"]
    row = [spec.label(), repr(curve), n, est.trials, cfg.seed, est.mean, est.stderr, exact, z]
    _emit(report.render_table(header, [row], cfg.format), cfg)
    _info(f"MC {report.fmt_human(est.mean)} +- {report.fmt_human(est.stderr)}   "
          f"analytic {report.fmt_human(exact)}")
    return 0


COMMANDS = {"ratio": cmd_ratio, "verify": cmd_verify, "scan": cmd_scan,
            "optimize": cmd_optimize, "simulate": cmd_simulate}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = resolve_config(ns)
        return COMMANDS[cfg.command](cfg)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (QuadratureError, rev.IntegrationMismatch, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
