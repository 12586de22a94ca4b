"""Acceptance checks run by the `verify` command, grouped into suites."""

import logging
from typing import Callable, Dict, List, Literal

import numpy as np

from cubic_geometry import m_map_deriv, v_branch_deriv
from equilibria import branch_point, count_roots, d_minus, d_plus, verify_asymptotics
from exceptions import LatticeLabError
from models import Branch, CheckResult, Params, Verdict
from wave_criteria import classify, gamma_fn, reflect_v, u_top

logger = logging.getLogger(__name__)

Suite = Literal["corner", "cusp", "gamma", "all"]

SQRT2, SQRT3 = np.sqrt(2.0), np.sqrt(3.0)


def _result(name: str, passed: bool, detail: str) -> CheckResult:
    level = logging.INFO if passed else logging.WARNING
    logger.log(level, f"{name}: {'PASS' if passed else 'FAIL'} ({detail})")
    return CheckResult(name=name, passed=bool(passed), detail=detail)


def check_root_counts() -> CheckResult:
    expected = {0.02: 9, 0.05: 5, 0.07: 3}
    found = {d: count_roots(Params(a=0.5, d=d)) for d in expected}
    return _result("root counts at a=1/2", found == expected, f"found {found}")


def check_d_minus() -> CheckResult:
    at_half = d_minus(0.5)
    symmetric = max(abs(d_minus(a) - d_minus(1.0 - a)) for a in (0.1, 0.2, 0.3, 0.4))
    samples = [d_minus(a) for a in np.linspace(0.05, 0.5, 10)]
    increasing = bool(np.all(np.diff(samples) > 0.0))
    passed = abs(at_half - 1.0 / 24.0) < 1e-8 and symmetric < 1e-9 and increasing
    return _result(
        "d_minus cusp value, symmetry and monotonicity", passed,
        f"d_-(1/2)={at_half!r}, symmetry gap {symmetric:.2e}, increasing={increasing}",
    )


def check_d_plus_tangency() -> CheckResult:
    worst = 0.0
    for a in (0.3, 0.45):
        params = Params(a=a, d=d_plus(a))
        worst = max(worst, abs(m_map_deriv(a, params) + 1.0), abs(v_branch_deriv(a, a, "minus") + 1.0))
    exact = all(d_plus(a) == a * (1.0 - a) / 4.0 for a in (0.1, 0.3, 0.5))
    return _result("tangency at d_plus", exact and worst < 1e-9, f"largest slope error {worst:.2e}")


def check_corner() -> List[CheckResult]:
    near_zero = verify_asymptotics("corner_a0", [0.04, 0.06, 0.08, 0.10])
    near_one = verify_asymptotics("corner_a1", [0.04, 0.06, 0.08, 0.10])
    return [
        _result("corner expansion of d_minus", near_zero.passed,
                f"ratios {[round(s.ratio, 4) for s in near_zero.samples]}, bound {near_zero.bound:.4g}"),
        _result("expansion of branch B as a -> 1", near_one.passed,
                f"ratios {[round(s.ratio, 4) for s in near_one.samples]}, bound {near_one.bound:.4g}"),
    ]


def check_cusp_expansion() -> CheckResult:
    report = verify_asymptotics("cusp", [4e-4, 1e-3, 2e-3])
    return _result("cusp expansion of a_minus", report.passed,
                   f"ratios {[round(s.ratio, 4) for s in report.samples]}, bound {report.bound:.4g}")


def check_cusp_closed_forms() -> CheckResult:
    params = Params(a=0.5, d=1.0 / 24.0)
    u_b, v_b = branch_point(Branch.B, params)
    top = u_top(params)
    reflected = reflect_v(top, params)
    errors = (
        abs(u_b - (0.5 - SQRT3 / 6.0)), abs(v_b - (0.5 + SQRT3 / 6.0)),
        abs(top - (0.5 - 4.0 * SQRT2 / 9.0 + SQRT3 / 6.0)),
    )
    passed = max(errors) < 1e-8 and abs(reflected - 0.6286) < 5e-4
    return _result("cusp closed forms", passed,
                   f"B=({u_b:.10f}, {v_b:.10f}), u_top={top:.10f}, reflect_v(u_top)={reflected:.6f}")


def check_cusp_travelling() -> CheckResult:
    report = classify(Params(a=0.5, d=0.0415))
    return _result("travelling verdict near the cusp", report.verdict == Verdict.PROVEN_TRAVELLING,
                   f"verdict {report.verdict.value}, u_bot={report.u_bot!r}, u_top={report.u_top!r}")


def check_gamma() -> CheckResult:
    grid = np.round(np.arange(0.50, 0.995, 0.01), 2)
    values = {float(a): gamma_fn(float(a)) for a in grid}
    negative = [a for a, value in values.items() if not value > 0.0]
    return _result("Gamma positive on [0.50, 0.99]", not negative,
                   f"min Gamma {min(values.values()):.4e}, non-positive at {negative}")


SUITES: Dict[str, List[Callable]] = {
    "corner": [check_root_counts, check_d_minus, check_d_plus_tangency, check_corner],
    "cusp": [check_cusp_expansion, check_cusp_closed_forms, check_cusp_travelling],
    "gamma": [check_gamma],
}


def run_suite(suite: Suite) -> List[CheckResult]:
    """Run every check of a suite ("all" runs corner, cusp and gamma); errors count as failures"""
    names = list(SUITES) if suite == "all" else [suite]
    if any(name not in SUITES for name in names):
        raise ValueError(f"Unknown suite {suite!r}")
    results: List[CheckResult] = []
    for name in names:
        for check in SUITES[name]:
            try:
                outcome = check()
            except LatticeLabError as e:
                outcome = _result(check.__name__, False, f"raised {type(e).__name__}: {e}")
            results.extend(outcome if isinstance(outcome, list) else [outcome])
    return results
