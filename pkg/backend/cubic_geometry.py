"""
Geometry of the cubic nonlinearity g(u; a) = u(1 - u)(u - a).

Everything downstream (equilibria, wave criteria, standing fronts) is built
from the functions here: the polynomial and its derivatives, its critical
points, the balance curves v_-(u), v_+(u) solving g(v) = -g(u), and the
scalar map m(x) = x - g(x; a) / (2d) with its critical points gamma_-, gamma_+.

All functions accept numpy arrays where the argument is a lattice of points
and return plain floats for scalar input.
"""

import logging
from typing import Literal, Tuple, Union

import numpy as np

from exceptions import DiscriminantNegative, OutOfDomain, SingularDerivative
from models import CubicCriticalPoints, Params

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]
Which = Literal["minus", "plus"]

# |g'(v)| below this is treated as a vertical tangent of the balance curves
SINGULAR_TOL = 1e-12
_POLISH_STEPS = 3


def _output(values: np.ndarray, scalar: bool) -> ArrayLike:
    return float(values) if scalar else values


def eval_g(u: ArrayLike, a: float, order: int = 0) -> ArrayLike:
    """
    Evaluate g(u; a) or one of its derivatives in closed form.

    Args:
        u: Point or array of points
        a: Detuning parameter
        order: 0 for g, 1 for g', 2 for g'', 3 for g'''

    Returns:
        Value with the shape of u
    """
    x = np.asarray(u, dtype=float)
    if order == 0:
        values = x * (1.0 - x) * (x - a)
    elif order == 1:
        values = -3.0 * x * x + 2.0 * (1.0 + a) * x - a
    elif order == 2:
        values = -6.0 * x + 2.0 * (1.0 + a)
    elif order == 3:
        values = np.full_like(x, -6.0)
    else:
        raise ValueError(f"Derivative order must be 0..3, got {order}")
    return _output(values, x.ndim == 0)


def critical_points(a: float) -> CubicCriticalPoints:
    """Local minimum, inflection point and local maximum of g(.; a)"""
    u_infl = (a + 1.0) / 3.0
    half_width = np.sqrt(1.0 - a * (1.0 - a)) / 3.0
    return CubicCriticalPoints(u_min=u_infl - half_width, u_infl=u_infl, u_max=u_infl + half_width)


def _polish(x: np.ndarray, c2: np.ndarray, c1: np.ndarray, c0: np.ndarray) -> np.ndarray:
    # Newton on the monic cubic, accepting a step only when the residual shrinks
    for _ in range(_POLISH_STEPS):
        p = ((x + c2) * x + c1) * x + c0
        dp = (3.0 * x + 2.0 * c2) * x + c1
        safe = np.abs(dp) > 1e-8
        step = np.where(safe, p / np.where(safe, dp, 1.0), 0.0)
        candidate = x - step
        p_new = ((candidate + c2) * candidate + c1) * candidate + c0
        x = np.where(np.abs(p_new) <= np.abs(p), candidate, x)
    return x


def cubic_real_roots(c2: ArrayLike, c1: ArrayLike, c0: ArrayLike) -> np.ndarray:
    """
    Real roots of the monic cubic x^3 + c2 x^2 + c1 x + c0.

    Uses the trigonometric form when all three roots are real and Cardano's
    formula otherwise, then Newton-polishes every root.

    Returns:
        Array of shape (..., 3): real roots in ascending order, padded with NaN
        when only one root is real
    """
    c2, c1, c0 = np.broadcast_arrays(
        np.asarray(c2, dtype=float), np.asarray(c1, dtype=float), np.asarray(c0, dtype=float)
    )
    q = (3.0 * c1 - c2 * c2) / 9.0
    r = (9.0 * c2 * c1 - 27.0 * c0 - 2.0 * c2 ** 3) / 54.0
    disc = q ** 3 + r * r
    shift = c2 / 3.0

    # Near-zero discriminants are double roots; treat them as three real roots
    three_real = disc <= 64.0 * np.finfo(float).eps * (np.abs(q) ** 3 + r * r)

    sqrt_q = np.sqrt(np.maximum(-q, 0.0))
    denom = np.where(sqrt_q > 0.0, sqrt_q ** 3, 1.0)
    theta = np.arccos(np.clip(r / denom, -1.0, 1.0))
    trig = np.stack(
        [2.0 * sqrt_q * np.cos((theta + 2.0 * np.pi * k) / 3.0) - shift for k in range(3)], axis=-1
    )

    sqrt_disc = np.sqrt(np.maximum(disc, 0.0))
    single = np.cbrt(r + sqrt_disc) + np.cbrt(r - sqrt_disc) - shift
    cardano = np.stack([single, np.full_like(single, np.nan), np.full_like(single, np.nan)], axis=-1)

    roots = np.where(three_real[..., None], trig, cardano)
    roots = _polish(roots, c2[..., None], c1[..., None], c0[..., None])
    return np.sort(roots, axis=-1)


def _check_branch_domain(u: np.ndarray, a: float) -> np.ndarray:
    if a > 0.5 + 1e-15:
        logger.error(f"v_branches called with a={a} > 1/2")
        raise OutOfDomain(f"Balance curves are defined for a <= 1/2, got a={a}")
    slack = 1e-12
    if np.any(u < -slack) or np.any(u > a + slack):
        raise OutOfDomain(f"Balance curves need u in [0, a={a}]")
    return np.clip(u, 0.0, a)


def v_branches(u: ArrayLike, a: float) -> Tuple[ArrayLike, ArrayLike]:
    """
    Solve g(v; a) = -g(u; a) for the two roots v_-(u) <= v_+(u) in [a, 1].

    Args:
        u: Point or array of points in [0, a]
        a: Detuning in (0, 1/2]

    Returns:
        Tuple (v_minus, v_plus)

    Raises:
        OutOfDomain: If a > 1/2 or u lies outside [0, a]
    """
    x = _check_branch_domain(np.asarray(u, dtype=float), a)
    g_u = eval_g(x, a)

    if abs(a - 0.5) <= 1e-15:
        # g(1 - u; 1/2) = -g(u; 1/2): deflate by the exact root w = 1 - u
        w = 1.0 - x
        p = w - 1.5
        q = 0.5 + w * p
        half_disc = np.sqrt(np.maximum(0.25 * p * p - q, 0.0))
        roots = np.sort(np.stack([w, -0.5 * p - half_disc, -0.5 * p + half_disc], axis=-1), axis=-1)
    else:
        roots = cubic_real_roots(-(1.0 + a), a, -np.asarray(g_u))

    v_minus = np.clip(roots[..., 1], a, 1.0)
    v_plus = np.clip(roots[..., 2], a, 1.0)
    v_minus, v_plus = np.minimum(v_minus, v_plus), np.maximum(v_minus, v_plus)
    scalar = x.ndim == 0
    return _output(v_minus, scalar), _output(v_plus, scalar)


def _select(u: ArrayLike, a: float, which: Which) -> np.ndarray:
    if which not in ("minus", "plus"):
        raise ValueError(f"which must be 'minus' or 'plus', got {which!r}")
    v_minus, v_plus = v_branches(u, a)
    return np.asarray(v_minus if which == "minus" else v_plus, dtype=float)


def _branch_slope_terms(u: ArrayLike, a: float, which: Which):
    x = np.asarray(u, dtype=float)
    v = _select(x, a, which)
    gp_v = np.asarray(eval_g(v, a, 1))
    # At a = 1/2 both curves have a vertical tangent at u_min (one-sided limits only)
    at_collision = abs(a - 0.5) <= 1e-15 and np.any(np.abs(x - critical_points(a).u_min) < 1e-9)
    if at_collision or np.any(np.abs(gp_v) < SINGULAR_TOL):
        logger.error(f"g'(v_{which}) vanishes for a={a}")
        raise SingularDerivative(f"g'(v_{which}(u); a) = 0 for a={a}; derivative undefined")
    return x, v, gp_v


def v_branch_deriv(u: ArrayLike, a: float, which: Which) -> ArrayLike:
    """v'_(u) = -g'(u; a) / g'(v(u); a) on the selected balance curve"""
    x, _, gp_v = _branch_slope_terms(u, a, which)
    values = -np.asarray(eval_g(x, a, 1)) / gp_v
    return _output(values, x.ndim == 0)


def v_branch_second_deriv(u: ArrayLike, a: float, which: Which) -> ArrayLike:
    """Second derivative of the selected balance curve, from differentiating g(v(u)) = -g(u) twice"""
    x, v, gp_v = _branch_slope_terms(u, a, which)
    gp_u = np.asarray(eval_g(x, a, 1))
    values = -np.asarray(eval_g(x, a, 2)) / gp_v - gp_u ** 2 * np.asarray(eval_g(v, a, 2)) / gp_v ** 3
    return _output(values, x.ndim == 0)


def _require_coupling(params: Params):
    if not params.coupled:
        logger.error("m-map requested at d = 0")
        raise OutOfDomain("The m-map x - g(x)/(2d) needs d > 0")


def m_map(x: ArrayLike, params: Params) -> ArrayLike:
    """m(x) = x - g(x; a) / (2d); its fixed points are the roots of g"""
    _require_coupling(params)
    values = np.asarray(x, dtype=float)
    return _output(values - np.asarray(eval_g(values, params.a)) / (2.0 * params.d), values.ndim == 0)


def m_map_deriv(x: ArrayLike, params: Params) -> ArrayLike:
    _require_coupling(params)
    values = np.asarray(x, dtype=float)
    return _output(1.0 - np.asarray(eval_g(values, params.a, 1)) / (2.0 * params.d), values.ndim == 0)


def gamma_crit_at(a: float, d: float) -> Tuple[float, float]:
    """
    Critical points gamma_- < gamma_+ of the m-map for raw (a, d).

    Accepts the closed parameter square, so limits such as (a, d) = (1, 0)
    can be evaluated.

    Raises:
        DiscriminantNegative: If a^2 - a + 1 - 6d < 0
    """
    disc = a * a - a + 1.0 - 6.0 * d
    if disc < 0.0:
        logger.error(f"No m-map critical points at a={a}, d={d} (discriminant {disc})")
        raise DiscriminantNegative(f"a^2 - a + 1 - 6d = {disc} < 0 at a={a}, d={d}")
    center = (a + 1.0) / 3.0
    half_width = np.sqrt(disc) / 3.0
    return float(center - half_width), float(center + half_width)


def gamma_crit(params: Params) -> Tuple[float, float]:
    """Critical points (gamma_-, gamma_+) of m at params; m decreases strictly between them"""
    return gamma_crit_at(params.a, params.d)
