"""Acceptance checks, one per criterion, each printing a single PASS/FAIL line.

Every ``criterion_*`` function returns ``(passed, summary, record)`` where
``record`` is the machine-readable output used by the determinism check.
Run directly (``python3 tests/test_acceptance.py``) or through pytest; the
pytest summary lists the same lines.
"""

import time

import numpy as np
import pytest

from bidinflation import bounds, report
from bidinflation import revenue as rev
from bidinflation.curves import ExponentialCurve, TriangleCurve, UniformCurve
from bidinflation.mechanisms import MixedInflatedSPA
from bidinflation.montecarlo import estimate_revenue
from bidinflation.search import SearchConfig, scan_triangles
from bidinflation.testbeds import curve_matrix, oracle_matrix, random_concave_curves, triangle_grid

SLACK = 1e-8
RESULTS = {}


def criterion_1():
    """Two-bidder (0.15, 1) mixture: composite bound and exact triangle scan both >= 0.512."""
    grid = np.arange(500) * 1e-3  # [0, 0.5)
    comp = [bounds.composite_mixed_ratio_lb(float(q), 2, 0.15, 1.0) for q in grid]
    scan = scan_triangles(MixedInflatedSPA(0.15, 1.0), 2, SearchConfig(q_step=1e-3, q_max=0.5))
    c_min, s_min = min(comp), scan.min_ratio
    ok = c_min >= 0.512 - SLACK and s_min >= 0.512 - SLACK
    rec = {"composite_min": c_min, "composite_argmin": float(grid[int(np.argmin(comp))]),
           "scan_min": s_min, "scan_argmin": scan.argmin}
    return ok, f"composite min {c_min:.6f}, triangle-scan min {s_min:.6f} (need >= 0.512)", rec


def criterion_2():
    res = [bounds.theorem31_verify(n) for n in (2, 3, 4, 5)]
    anchor = bounds.delta1_ratio_lb(0.0, 2)
    ok = all(r.certified_margin > 0 for r in res) and abs(anchor - 0.524306) < 5e-7
    margins = ", ".join(f"n={r.n}: {r.certified_margin:.3g}" for r in res)
    return ok, f"margins {margins}; q*=0 anchor {anchor:.6f}", [r.to_dict() for r in res]


def criterion_3():
    res = bounds.theorem42_verify(0.8e-6, 0.01, 0.2e-6, 1.0)
    ok = (res.certified_margin >= 5e-9 and res.case_a_min >= 0.505 and res.case_b_min >= 0.518
          and res.case_c_min >= 0.500005)
    return ok, (f"margin {res.certified_margin:.4g}; cases A {res.case_a_min:.6f}, "
                f"B {res.case_b_min:.6f}, C {res.case_c_min:.7f}"), res.to_dict()


def criterion_4():
    worst, rows = 0.0, []
    for n in (2, 3, 5):
        for c in triangle_grid(0.01):
            q = c.monopoly.quantile
            exact = rev.spa_revenue(c, n) / rev.optimal_revenue(c, n)
            closed = (1 - (1 - q) ** (n - 1)) / (1 - (1 - q) ** n)
            worst = max(worst, abs(exact - closed))
            rows.append([n, q, exact])
    return worst <= 1e-9, f"max |exact - closed form| = {worst:.2e}", rows


def criterion_5():
    curves = [UniformCurve(), ExponentialCurve(1.0)] + triangle_grid(0.01) + random_concave_curves(5)
    unsound, quant, checked = [], 0, 0
    for c in curves:
        for r in bounds.curve_bound_reports(c, 2, deltas=(0.5, 1.0, 2.0), tol=SLACK):
            checked += 1
            if not r.sound:
                unsound.append((repr(c), r.name))
        for d in (0.5, 1.0, 2.0):
            quant += len(bounds.quant_bound_check(c, d, grid=1001))
    ok = not unsound and quant == 0
    return ok, (f"{checked} bound checks on {len(curves)} curves, {len(unsound)} unsound, "
                f"{quant} quantile-bound violations"), {"unsound": unsound, "quant": quant,
                                                       "checked": checked}


ANCHORS = [
    ("spa(uniform, n=2)", lambda: rev.spa_revenue(UniformCurve(), 2), 1 / 3),
    ("opt(uniform, n=2)", lambda: rev.optimal_revenue(UniformCurve(), 2), 5 / 12),
    ("pts(uniform, 1)", lambda: rev.pts_revenue(UniformCurve(), 1.0), 1 / 6),
    ("pts(uniform, 2)", lambda: rev.pts_revenue(UniformCurve(), 2.0), 1 / 12),
]


def criterion_6():
    rows, worst_z = [], 0.0
    for i, (spec, curve, n) in enumerate(oracle_matrix()):
        exact = rev.expected_revenue(spec, curve, n)
        est = estimate_revenue(spec, curve, n, 1_000_000, seed=1000 + i)
        z = abs(est.mean - exact) / est.stderr
        worst_z = max(worst_z, z)
        rows.append([spec.label(), repr(curve), n, exact, est.mean, est.stderr, z])
    anchor_err = max(abs(fn() - v) for _, fn, v in ANCHORS)
    ok = worst_z <= 4.0 and anchor_err <= 1e-9 and len(rows) >= 12
    return ok, (f"{len(rows)} pairs, max |z| = {worst_z:.2f} (need <= 4); "
                f"anchor error {anchor_err:.1e}"), rows


def criterion_7():
    rows, fails, tight = [], 0, 0.0
    for c in curve_matrix(triangle_step=0.05):
        for n in (1, 2, 3):
            spa, opt = rev.spa_revenue(c, n + 1), rev.optimal_revenue(c, n)
            fails += spa < opt - 1e-9
            if n == 1 and isinstance(c, TriangleCurve):
                tight = max(tight, abs(spa - opt))
            rows.append([repr(c), n, spa, opt])
    ok = fails == 0 and tight <= 1e-9
    return ok, f"{len(rows)} checks, {fails} failures; max triangle n=1 gap {tight:.1e}", rows


CRITERIA = {1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4,
            5: criterion_5, 6: criterion_6, 7: criterion_7}
_FIRST_RUN = {}


def _run(k):
    start = time.perf_counter()
    ok, summary, record = CRITERIA[k]()
    _FIRST_RUN.setdefault(k, report.to_json(record))
    return ok, summary, time.perf_counter() - start


def criterion_8():
    """Rerun 1-7 (and two seeded CLI runs) and compare serialised outputs byte for byte."""
    from bidinflation.cli import main
    import contextlib
    import io

    diffs = []
    for k in CRITERIA:
        if k not in _FIRST_RUN:
            _run(k)
        if report.to_json(CRITERIA[k]()[2]) != _FIRST_RUN[k]:
            diffs.append(k)
    outs = []
    for threads in (1, 4):
        buf = io.StringIO()
        with contextlib.redirect_stdout(buf):
            main(["simulate", "--mech", "pts:2", "--curve", "triangle:0.3", "--trials", "300000",
                  "--seed", "8", "--threads", str(threads), "--format", "json"])
            main(["scan", "--mech", "mixed:0.15,1", "--step", "0.01", "--format", "csv"])
        outs.append(buf.getvalue().encode())
    if outs[0] != outs[1]:
        diffs.append("cli")
    return not diffs, f"reruns byte-identical ({'all' if not diffs else f'differ: {diffs}'})", {}


def _record(k, ok, summary, secs):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {k}: {summary} ({secs:.1f}s)"
    RESULTS[k] = line
    print(line)
    return line


LIMITS = {1: 60, 2: 120, 3: 120, 4: 30, 5: 300, 6: 300, 7: 120}


@pytest.mark.parametrize("k", sorted(CRITERIA))
def test_criterion(k):
    ok, summary, secs = _run(k)
    _record(k, ok, summary, secs)
    assert ok, summary
    assert secs < LIMITS[k], f"criterion {k} took {secs:.1f}s"


def test_criterion_8_determinism():
    start = time.perf_counter()
    ok, summary, _ = criterion_8()
    _record(8, ok, summary, time.perf_counter() - start)
    assert ok, summary


if __name__ == "__main__":
    failed = 0
    for k in sorted(CRITERIA):
        ok, summary, secs = _run(k)
        _record(k, ok, summary, secs)
        failed += not ok
    start = time.perf_counter()
    ok, summary, _ = criterion_8()
    _record(8, ok, summary, time.perf_counter() - start)
    raise SystemExit(1 if failed or not ok else 0)
