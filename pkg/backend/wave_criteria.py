"""
Analytic criteria deciding whether the lower bichromatic front (0 -> pattern)
is pinned or travels.

The travelling test builds a rectangle from two reflections through the
m-map curves: v_bot < v_top both solve m(v) = u_B, u_top = 2 m(gamma_+) - u_B,
and u_bot is the right-most crossing of the reflected curve
v_r(u) = 2 m(u) - v_B with the inverse of m on [0, v_bot]. A standing front
cannot exist when u_bot < u_top. The pinning test is d <= (1 - a)^2 / 8.
Upper fronts (pattern -> 1) are handled through a -> 1 - a.
"""

import logging
from functools import lru_cache
from typing import Literal, Tuple, Union

import numpy as np
from scipy.optimize import brentq

from config import config
from cubic_geometry import gamma_crit, m_map
from equilibria import FOLD_TOL, branch_point, count_roots, d_minus, in_omega_minus
from exceptions import LatticeLabError, OutOfDomain
from models import Branch, CriterionReport, Params, Verdict

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]
Front = Literal["lower", "upper"]


def pinned_bound(a: float, front: Front = "lower") -> float:
    """Coupling below which the front is pinned: (1-a)^2/8 for lower fronts, a^2/8 for upper"""
    if front == "lower":
        return (1.0 - a) ** 2 / 8.0
    if front == "upper":
        return a * a / 8.0
    raise ValueError(f"front must be 'lower' or 'upper', got {front!r}")


def _settings() -> Tuple[int, float]:
    """Configuration the constructions depend on, used as part of every cache key"""
    return config.ROOT_SAMPLES, config.D_MINUS_TOL


def _pattern(params: Params) -> Tuple[float, float]:
    """The stable pattern (u_B, v_B), continuously extended up to d = d_-(a)"""
    return _pattern_at(params, *_settings())


@lru_cache(maxsize=1024)
def _pattern_at(params: Params, root_samples: int, d_minus_tol: float) -> Tuple[float, float]:
    if not params.coupled:
        raise OutOfDomain("Wave criteria need d > 0")
    if params.d > d_minus(params.a) + FOLD_TOL:
        raise OutOfDomain(f"Branch B does not exist at a={params.a}, d={params.d}")
    return branch_point(Branch.B, params)


def v_bot_top(params: Params) -> Tuple[float, float]:
    """
    The two solutions of m(v) = u_B with v_bot < gamma_- < v_top < gamma_+.

    Raises:
        OutOfDomain: Outside the closure of the nine-root region, or if the
            m-map does not straddle u_B on the expected intervals
    """
    return _v_bot_top_at(params, *_settings())


@lru_cache(maxsize=1024)
def _v_bot_top_at(params: Params, root_samples: int, d_minus_tol: float) -> Tuple[float, float]:
    u_b, _ = _pattern(params)
    gamma_minus, gamma_plus = gamma_crit(params)
    f = lambda v: float(m_map(v, params)) - u_b
    if not (f(0.0) < 0.0 < f(gamma_minus) and f(gamma_plus) < 0.0):
        logger.error(f"m-map does not bracket u_B={u_b!r} at a={params.a}, d={params.d}")
        raise OutOfDomain(f"v_bot/v_top undefined at a={params.a}, d={params.d}")
    v_bot = brentq(f, 0.0, gamma_minus, xtol=1e-15)
    v_top = brentq(f, gamma_minus, gamma_plus, xtol=1e-15)
    return v_bot, v_top


def u_top(params: Params) -> float:
    u_b, _ = _pattern(params)
    _, gamma_plus = gamma_crit(params)
    return 2.0 * float(m_map(gamma_plus, params)) - u_b


def reflect_v(u: ArrayLike, params: Params) -> ArrayLike:
    """Vertical reflection of the m-map curve through v = v_B: 2 m(u) - v_B"""
    _, v_b = _pattern(params)
    values = _reflect(u, params, v_b)
    return float(values) if np.ndim(values) == 0 else values


def _reflect(u: ArrayLike, params: Params, v_b: float) -> np.ndarray:
    return 2.0 * np.asarray(m_map(u, params)) - v_b


def _invert_m(x: np.ndarray, params: Params, v_bot: float) -> np.ndarray:
    """Vectorized bisection for m(v) = x on [0, v_bot]"""
    lo = np.zeros_like(x)
    hi = np.full_like(x, v_bot)
    for _ in range(64):
        mid = 0.5 * (lo + hi)
        below = np.asarray(m_map(mid, params)) < x
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    return 0.5 * (lo + hi)


def u_inv(u: ArrayLike, params: Params) -> ArrayLike:
    """
    Inverse of m restricted to [0, v_bot], where m increases from 0 to u_B.

    Raises:
        OutOfDomain: If some u lies outside [0, u_B]
    """
    u_b, _ = _pattern(params)
    x = np.asarray(u, dtype=float)
    if np.any(x < -1e-14) or np.any(x > u_b + 1e-12):
        raise OutOfDomain(f"u_inv needs u in [0, u_B={u_b!r}]")
    v_bot, _ = v_bot_top(params)
    values = _invert_m(x, params, v_bot)
    return float(values) if x.ndim == 0 else values


def u_bot(params: Params) -> float:
    """
    Right-most u in [0, u_B] with reflect_v(u) = u_inv(u).

    The difference is negative at 0 and positive at u_B, so a sign change
    always exists; the scan picks the last one and brentq polishes it.
    """
    u_b, v_b = _pattern(params)
    v_bot, _ = v_bot_top(params)
    difference = lambda x: _reflect(x, params, v_b) - _invert_m(np.asarray(x, dtype=float), params, v_bot)

    grid = np.linspace(0.0, u_b, config.U_BOT_SAMPLES)
    diff = difference(grid)
    changes = np.nonzero(np.sign(diff[:-1]) * np.sign(diff[1:]) <= 0.0)[0]
    if changes.size == 0:
        raise OutOfDomain(f"No crossing for u_bot at a={params.a}, d={params.d}")
    i = int(changes[-1])
    if diff[i + 1] == 0.0:
        return float(grid[i + 1])
    return brentq(lambda x: float(difference(x)), grid[i], grid[i + 1], xtol=1e-15)


def gamma_fn(a: float) -> float:
    """Gamma(a) = u_top - u_bot evaluated on the d_-(a) curve"""
    return _gamma_at(a, *_settings(), config.U_BOT_SAMPLES)


@lru_cache(maxsize=4096)
def _gamma_at(a: float, root_samples: int, d_minus_tol: float, u_bot_samples: int) -> float:
    params = Params(a=a, d=d_minus(a))
    value = u_top(params) - u_bot(params)
    logger.info(f"Gamma({a}) = {value!r}")
    return value


def crit_ordering_holds(params: Params) -> bool:
    """0 <= gamma_- <= a <= gamma_+ <= v_B"""
    gamma_minus, gamma_plus = gamma_crit(params)
    _, v_b = _pattern(params)
    return 0.0 <= gamma_minus <= params.a <= gamma_plus <= v_b


def simplified_test(params: Params) -> bool:
    """Cheaper sufficient test for travelling: reflect_v(u_top) > v_bot"""
    v_bot, _ = v_bot_top(params)
    return float(reflect_v(u_top(params), params)) > v_bot


def classify(params: Params) -> CriterionReport:
    """
    Run the pinning and travelling criteria for the lower front at params.

    Returns:
        CriterionReport with verdict OutsideDomain (root count is not nine),
        ProvenPinned (d <= (1-a)^2/8), ProvenTravelling (u_bot < u_top) or
        Undetermined. Numerical failures fold into the verdict.
    """
    a, d = params.a, params.d
    bound = pinned_bound(a)
    report = dict(params=params, in_omega_minus=False, pinned_bound=bound)

    try:
        root_count = count_roots(params)
    except LatticeLabError as e:
        logger.info(f"classify({a}, {d}): {e}")
        return CriterionReport(**report, verdict=Verdict.OUTSIDE_DOMAIN, note=str(e))
    report["root_count"] = root_count
    if root_count != 9:
        return CriterionReport(**report, verdict=Verdict.OUTSIDE_DOMAIN)
    report["in_omega_minus"] = in_omega_minus(params)

    try:
        v_bot, v_top = v_bot_top(params)
        top, bot = u_top(params), u_bot(params)
        report.update(
            v_bot=v_bot, v_top=v_top, u_top=top, u_bot=bot,
            travelling_test_passed=bot < top,
            simplified_test_passed=simplified_test(params),
        )
    except LatticeLabError as e:
        logger.warning(f"Travelling construction failed at a={a}, d={d}: {e}")
        report["note"] = str(e)

    try:
        report["gamma_at_dminus"] = gamma_fn(a)
    except LatticeLabError as e:
        logger.warning(f"Gamma({a}) unavailable: {e}")

    if d <= bound:
        verdict = Verdict.PROVEN_PINNED
        if report.get("travelling_test_passed"):
            logger.error(f"Pinning bound and travelling test both hold at a={a}, d={d}")
            report["note"] = "pinning bound and travelling test overlap"
    elif report.get("travelling_test_passed"):
        verdict = Verdict.PROVEN_TRAVELLING
    else:
        verdict = Verdict.UNDETERMINED
        if report.get("simplified_test_passed"):
            logger.warning(f"Simplified test passed but u_bot >= u_top at a={a}, d={d}")

    decided = verdict == Verdict.PROVEN_TRAVELLING and bool(report.get("simplified_test_passed"))
    return CriterionReport(**report, verdict=verdict, decided_by_simplified_test=decided)


def classify_upper(params: Params) -> CriterionReport:
    """Verdict for the upper front (pattern -> 1), read off the lower front at (1 - a, d)"""
    report = classify(params.mirrored())
    return report.model_copy(update={"note": "upper front evaluated at a -> 1 - a"})
