"""
Roots of the two-site system G(u, v; a, d) = 0 and the bifurcation curves.

G(u, v) = (2d(v - u) + g(u), 2d(u - v) + g(v)). Roots with u != v are the
2-periodic lattice patterns. For a <= 1/2 they are found on [0, a] as the
intersections of the balance curves v_-(u), v_+(u) with the m-map curve
v = m(u); the case a > 1/2 is mapped onto 1 - a by (u, v) -> (1 - v, 1 - u).
"""

import logging
from functools import lru_cache
from typing import Dict, List, Literal, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from config import config
from cubic_geometry import critical_points, eval_g, m_map, v_branches
from exceptions import BoundaryDegenerate, OutOfDomain
from models import (
    AsymptoticReport,
    AsymptoticSample,
    BifurcationCurves,
    Branch,
    BranchSample,
    Equilibrium,
    Params,
    Stability,
)

logger = logging.getLogger(__name__)

Point = Tuple[float, float]

# Determinants below this report as Degenerate (double roots at the bifurcation curves)
DEGENERATE_TOL = 1e-12
# Distance to d_-(a) within which B and C are evaluated at their fold
FOLD_TOL = 1e-9

# Labels under (u, v) -> (1 - v, 1 - u), a -> 1 - a
_MIRROR_LABELS = {
    Branch.ZERO: Branch.ONE,
    Branch.ONE: Branch.ZERO,
    Branch.MONO_A: Branch.MONO_A,
    Branch.A: Branch.C,
    Branch.C: Branch.A,
    Branch.B: Branch.B,
    Branch.D: Branch.D,
    Branch.SWAPPED_A: Branch.SWAPPED_C,
    Branch.SWAPPED_C: Branch.SWAPPED_A,
    Branch.SWAPPED_B: Branch.SWAPPED_B,
    Branch.SWAPPED_D: Branch.SWAPPED_D,
}


def mirror_point(point: Point) -> Point:
    """Map a root at (a, d) to the matching root at (1 - a, d)"""
    u, v = point
    return 1.0 - v, 1.0 - u


def eval_G(point: Point, params: Params) -> np.ndarray:
    u, v = point
    a, d = params.a, params.d
    return np.array([2.0 * d * (v - u) + eval_g(u, a), 2.0 * d * (u - v) + eval_g(v, a)])


def jacobian_G(eq_point: Point, params: Params) -> np.ndarray:
    """Jacobian of G with respect to (u, v)"""
    u, v = eq_point
    a, d = params.a, params.d
    return np.array([
        [eval_g(u, a, 1) - 2.0 * d, 2.0 * d],
        [2.0 * d, eval_g(v, a, 1) - 2.0 * d],
    ])


def stability_of(eq_point: Point, params: Params) -> Stability:
    jac = jacobian_G(eq_point, params)
    det = float(np.linalg.det(jac))
    trace = float(np.trace(jac))
    if abs(det) < DEGENERATE_TOL:
        return Stability.DEGENERATE
    if det < 0.0:
        return Stability.SADDLE
    return Stability.STABLE_NODE if trace < 0.0 else Stability.UNSTABLE_NODE


def _newton_polish(point: Point, params: Params, steps: int = 4) -> Point:
    x = np.array(point, dtype=float)
    residual = np.max(np.abs(eval_G(x, params)))
    for _ in range(steps):
        jac = jacobian_G(x, params)
        if abs(np.linalg.det(jac)) < DEGENERATE_TOL:
            break
        candidate = x - np.linalg.solve(jac, eval_G(x, params))
        candidate_residual = np.max(np.abs(eval_G(candidate, params)))
        if candidate_residual >= residual:
            break
        x, residual = candidate, candidate_residual
    return float(x[0]), float(x[1])


def d_plus(a: float) -> float:
    """d_+(a) = g'(a; a) / 4 = a(1 - a) / 4"""
    return a * (1.0 - a) / 4.0


# ---------------------------------------------------------------------------
# Tangency machinery behind d_-(a)
# ---------------------------------------------------------------------------

def _gap(u, a: float, d: float):
    """v_+(u) - m(u) on [0, a]; negative somewhere iff v_+ meets the m-map curve twice"""
    _, v_plus = v_branches(u, a)
    return v_plus - m_map(u, Params(a=a, d=d))


def _gap_minimum(a: float, d: float, samples: Optional[int] = None) -> Tuple[float, float]:
    """
    Global minimum of v_+(u) - m(u) over u in [0, a].

    Returns:
        Tuple (minimum value, minimizer)
    """
    samples = samples or config.ROOT_SAMPLES
    grid = np.union1d(np.linspace(0.0, a, samples), [critical_points(a).u_min])
    values = _gap(grid, a, d)
    i = int(np.argmin(values))
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, grid.size - 1)]
    best_u, best_value = float(grid[i]), float(values[i])
    if hi > lo:
        result = minimize_scalar(
            lambda x: float(_gap(x, a, d)), bounds=(lo, hi), method="bounded",
            options={"xatol": 1e-13},
        )
        if result.fun < best_value:
            best_u, best_value = float(result.x), float(result.fun)
    return best_value, best_u


@lru_cache(maxsize=4096)
def _d_minus_half(a: float, samples: int, tol: float) -> float:
    lo, hi = 0.0, d_plus(a)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        depth, _ = _gap_minimum(a, mid, samples)
        if depth < 0.0:
            lo = mid
        else:
            hi = mid
        logger.debug(f"d_minus({a}) bracket [{lo!r}, {hi!r}] depth={depth:.3e}")
    return 0.5 * (lo + hi)


def d_minus(a: float) -> float:
    """
    Upper boundary d_-(a) of the nine-root region.

    Bisects on the sign of min_u (v_+(u) - m(u)), which is negative exactly
    when the stable pattern and its saddle partner exist. Uses d_-(a) = d_-(1 - a).
    """
    if not 0.0 < a < 1.0:
        raise OutOfDomain(f"d_minus needs 0 < a < 1, got a={a}")
    half = min(a, 1.0 - a)
    value = _d_minus_half(half, config.ROOT_SAMPLES, config.D_MINUS_TOL)
    logger.info(f"d_minus({a}) = {value!r}")
    return value


def bifurcation_curves(a: float) -> BifurcationCurves:
    """d_-(a) and d_+(a) together, as tabulated by the curves command"""
    return BifurcationCurves(a=a, d_minus=d_minus(a), d_plus=d_plus(a))


def in_omega_minus(params: Params) -> bool:
    """Whether 0 < d < d_-(a), the region with nine roots"""
    return 0.0 < params.d < d_minus(params.a)


def a_minus(d: float, tol: float = 1e-13) -> float:
    """
    Inverse of d_- on (0, 1/2]: the a at which the lower branch of the
    d_- curve passes through the given d.
    """
    if not 0.0 < d <= 1.0 / 24.0 + config.D_MINUS_TOL:
        raise OutOfDomain(f"a_minus needs 0 < d <= 1/24, got d={d}")
    # Below a_-(d) the point (a, d) lies above the d_- curve and the gap is positive
    lo, hi = 0.0, 0.5
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        depth, _ = _gap_minimum(mid, d)
        if depth < 0.0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# Root enumeration
# ---------------------------------------------------------------------------

def _v_minus_root(a: float, d: float) -> Optional[Point]:
    """The unique intersection of v_- with the m-map curve on (0, a), if d < d_+(a)"""
    if d >= d_plus(a):
        return None
    params = Params(a=a, d=d)

    def h(u):
        v_minus, _ = v_branches(u, a)
        return v_minus - m_map(u, params)

    # h(0) = a > 0 and h increases through h(a) = 0, so h < 0 just left of a
    delta = 0.1 * a
    while h(a - delta) >= 0.0:
        delta *= 0.5
        if delta < 1e-15:
            logger.warning(f"v_- intersection not bracketed at a={a}, d={d}")
            return None
    u = brentq(h, 0.0, a - delta, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    return u, float(m_map(u, params))


def _v_plus_roots(a: float, d: float) -> List[Point]:
    """The two intersections of v_+ with the m-map curve on [0, a], smaller u first"""
    depth, u_star = _gap_minimum(a, d)
    if depth >= 0.0:
        return []
    params = Params(a=a, d=d)
    f = lambda x: float(_gap(x, a, d))
    roots = []
    for lo, hi in ((0.0, u_star), (u_star, a)):
        u = brentq(f, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)
        roots.append((u, float(m_map(u, params))))
    return roots


def _line_root(d: float) -> Point:
    """Root on the line v = 1 - u at a = 1/2: u(1 - u) = 4d"""
    u = 0.5 - np.sqrt(max(0.25 - 4.0 * d, 0.0))
    return float(u), float(1.0 - u)


def _labelled_roots_half(a: float, d: float) -> List[Tuple[Point, Branch]]:
    """Labelled roots for a <= 1/2, homogeneous ones included, swaps excluded"""
    roots = [((0.0, 0.0), Branch.ZERO), ((a, a), Branch.MONO_A), ((1.0, 1.0), Branch.ONE)]
    dm = _d_minus_half(a, config.ROOT_SAMPLES, config.D_MINUS_TOL)
    exact_half = abs(a - 0.5) <= 1e-15

    lower = _v_minus_root(a, d)
    if lower is not None:
        label = Branch.A if d < dm else Branch.D
        if exact_half and label == Branch.D:
            lower = _line_root(d)
        roots.append((lower, label))

    if d < dm:
        pair = _v_plus_roots(a, d)
        if len(pair) == 2:
            b_point, c_point = pair
            if exact_half:
                b_point = _line_root(d)
            roots.extend([(b_point, Branch.B), (c_point, Branch.C)])
    return roots


def solve_equilibria(params: Params) -> List[Equilibrium]:
    """
    Enumerate all roots of G = 0 in [0, 1]^2 with branch labels and stability.

    Args:
        params: (a, d) with d > 0 away from the bifurcation curves

    Returns:
        Nine, five or three equilibria, closed under (u, v) -> (v, u)

    Raises:
        OutOfDomain: If d = 0
        BoundaryDegenerate: If d is within BOUNDARY_TOL of d_-(a) or d_+(a)
    """
    if not params.coupled:
        raise OutOfDomain("solve_equilibria needs d > 0")
    a, d = params.a, params.d
    dm, dp = d_minus(a), d_plus(a)
    if abs(d - dm) <= config.BOUNDARY_TOL or abs(d - dp) <= config.BOUNDARY_TOL:
        logger.error(f"Degenerate root count at a={a}, d={d} (d_-={dm!r}, d_+={dp!r})")
        raise BoundaryDegenerate(f"(a={a}, d={d}) is within {config.BOUNDARY_TOL} of a bifurcation curve")

    mirrored = a > 0.5
    half = 1.0 - a if mirrored else a
    labelled = _labelled_roots_half(half, d)
    if mirrored:
        labelled = [(mirror_point(point), _MIRROR_LABELS[label]) for point, label in labelled]

    result: List[Equilibrium] = []
    for point, label in labelled:
        u, v = _newton_polish(point, params)
        result.append(Equilibrium(u=u, v=v, branch=label, stability=stability_of((u, v), params)))
        if label not in (Branch.ZERO, Branch.MONO_A, Branch.ONE):
            result.append(Equilibrium(u=v, v=u, branch=label.swapped(), stability=stability_of((v, u), params)))

    logger.info(f"{len(result)} equilibria at a={a}, d={d}")
    return result


def count_roots(params: Params) -> int:
    return len(solve_equilibria(params))


# ---------------------------------------------------------------------------
# Individual branches
# ---------------------------------------------------------------------------

def _fold_point(a: float, d: float) -> Point:
    _, u_star = _gap_minimum(a, d)
    return u_star, float(m_map(u_star, Params(a=a, d=d)))


def _branch_point_half(branch: Branch, a: float, d: float) -> Point:
    dm, dp = _d_minus_half(a, config.ROOT_SAMPLES, config.D_MINUS_TOL), d_plus(a)
    exact_half = abs(a - 0.5) <= 1e-15

    if branch in (Branch.A, Branch.B, Branch.C):
        if d > dm + FOLD_TOL:
            raise OutOfDomain(f"Branch {branch.value} needs d <= d_-(a)={dm!r}, got d={d} at a={a}")
        if d == 0.0:
            return {Branch.A: (0.0, a), Branch.B: (0.0, 1.0), Branch.C: (a, 1.0)}[branch]
        if branch == Branch.A:
            point = _v_minus_root(a, d)
            if point is None:
                raise OutOfDomain(f"Branch A not found at a={a}, d={d}")
            return point
        if exact_half and branch == Branch.B:
            return _line_root(d)
        if abs(d - dm) <= FOLD_TOL:
            return _fold_point(a, d)
        pair = _v_plus_roots(a, d)
        if len(pair) != 2:
            return _fold_point(a, d)
        return pair[0] if branch == Branch.B else pair[1]

    if branch == Branch.D:
        if d < dm - FOLD_TOL or d > dp:
            raise OutOfDomain(f"Branch D needs d_-(a) <= d <= d_+(a), got d={d} at a={a}")
        if exact_half:
            return _line_root(d)
        if d >= dp - 1e-15:
            return a, a
        point = _v_minus_root(a, d)
        return point if point is not None else (a, a)

    raise OutOfDomain(f"branch_point is defined for bichromatic branches, got {branch.value}")


def branch_point(branch: Branch, params: Params) -> Point:
    """
    Location (u, v) of a bichromatic branch at params.

    A, B and C live on the closure of the nine-root region d <= d_-(a); D on
    d_-(a) <= d <= d_+(a). At d = d_-(a) the colliding pair is returned at
    its fold (the continuous extension). Swapped labels return (v, u).

    Raises:
        OutOfDomain: If params lie outside the branch's region
    """
    if branch in (Branch.SWAPPED_A, Branch.SWAPPED_B, Branch.SWAPPED_C, Branch.SWAPPED_D):
        u, v = branch_point(branch.swapped(), params)
        return v, u
    a, d = params.a, params.d
    if a > 0.5:
        return mirror_point(_branch_point_half(_MIRROR_LABELS[branch], 1.0 - a, d))
    point = _branch_point_half(branch, a, d)
    if d > 0.0 and not abs(d - d_minus(a)) <= FOLD_TOL:
        point = _newton_polish(point, params)
    return point


def _continue(start: Point, d_from: float, d_to: float, a: float,
              min_step: float = 1e-12, jump: float = 0.05) -> Optional[Point]:
    """Newton continuation of one root from d_from to d_to with step halving"""
    point, d_now = start, d_from
    step = d_to - d_from
    while d_now < d_to:
        step = min(step, d_to - d_now)
        target = d_now + step
        params = Params(a=a, d=target)
        x = np.array(point)
        converged = False
        for _ in range(25):
            jac = jacobian_G(x, params)
            if abs(np.linalg.det(jac)) < DEGENERATE_TOL:
                break
            x = x - np.linalg.solve(jac, eval_G(x, params))
            if np.max(np.abs(eval_G(x, params))) < 1e-13:
                converged = True
                break
        if converged and np.max(np.abs(x - np.array(point))) <= jump:
            point, d_now = (float(x[0]), float(x[1])), target
            step *= 2.0
        else:
            step *= 0.5
            if step < min_step:
                logger.debug(f"Continuation stopped at d={d_now!r} for a={a}")
                return None
    return point


def trace_branches(a: float, d_values: Sequence[float]) -> List[BranchSample]:
    """
    Branch diagram at fixed a by natural continuation in d.

    Starts from the exact d = 0 values of A, B and C and continues each
    through the requested d values. The branch that survives d_-(a) is
    relabelled D and is followed up to d_+(a).

    Args:
        a: Detuning in (0, 1)
        d_values: Increasing coupling values, all >= 0

    Returns:
        Samples ordered by branch, then by d
    """
    ds = np.asarray(d_values, dtype=float)
    if ds.size and (np.any(ds < 0.0) or np.any(np.diff(ds) <= 0.0)):
        raise ValueError("d_values must be non-negative and strictly increasing")
    mirrored = a > 0.5
    half = 1.0 - a if mirrored else a
    dm, dp = d_minus(half), d_plus(half)

    # A continues into D past d_-(a); B and C terminate at their fold
    starts: Dict[Branch, Point] = {Branch.A: (0.0, half), Branch.B: (0.0, 1.0), Branch.C: (half, 1.0)}
    samples: List[BranchSample] = []
    for label, start in starts.items():
        point, d_prev = start, 0.0
        for d in ds:
            if d >= dp or point is None:
                break
            if d > 0.0:
                point = _continue(point, d_prev, float(d), half)
                if point is None:
                    break
                d_prev = float(d)
            shown = label
            if label == Branch.A and d > dm:
                shown = Branch.D
            out = mirror_point(point) if mirrored else point
            if mirrored:
                shown = _MIRROR_LABELS[shown]
            samples.append(BranchSample(branch=shown, d=float(d), u=out[0], v=out[1]))
    logger.info(f"Traced {len(samples)} branch samples at a={a}")
    return samples


# ---------------------------------------------------------------------------
# Asymptotic expansions
# ---------------------------------------------------------------------------

Asymptotics = Literal["corner_a0", "corner_a1", "cusp"]


def _bounded_ratios(samples: Sequence[float], errors: np.ndarray, scales: np.ndarray,
                    resolution: float) -> Tuple[np.ndarray, float, bool]:
    safe = scales > 0.0
    ratios = np.where(safe, errors / np.where(safe, scales, 1.0), 0.0)
    reference = int(np.argmax(samples))
    bound = 3.0 * ratios[reference]
    slack = np.where(safe, resolution / np.where(safe, scales, 1.0), 0.0)
    passed = bool(np.all(ratios <= bound + slack))
    return ratios, float(bound), passed


def verify_asymptotics(which: Asymptotics, samples: Sequence[float]) -> AsymptoticReport:
    """
    Compare computed curve data with their leading-order expansions.

    corner_a0: d_-(a) against a^2/8 + a^4/32, error scaled by a^5; the fold
        location u ~ a/2, v ~ 1 - a^2/4 - a^3/8 is reported alongside.
    corner_a1: u_B(a, d_-(a)) against (1-a)^2/4 + (1-a)^3/8 with samples
        given as 1 - a, error scaled by (1-a)^4; v_B against 1 - (1-a)/2.
    cusp: a_-(d) against 1/2 - sqrt(1152 delta^3) with samples given as
        delta = 1/24 - d, error scaled by delta^2.

    The check passes when no scaled error exceeds three times the scaled
    error at the largest sample.
    """
    xs = np.asarray(samples, dtype=float)
    extras: List[AsymptoticSample] = []

    if which == "corner_a0":
        if np.any(xs < 0.0) or np.any(xs > 0.2):
            raise OutOfDomain("corner_a0 samples must lie in [0, 0.2]")
        computed = np.array([d_minus(x) if x > 0.0 else 0.0 for x in xs])
        expansion = xs ** 2 / 8.0 + xs ** 4 / 32.0
        scales = xs ** 5
        resolution = 10.0 * config.D_MINUS_TOL
        for x in xs[xs > 0.0]:
            u_fold, v_fold = _fold_point(x, d_minus(x))
            extras.append(_sample(x, u_fold, x / 2.0, x ** 4))
            extras.append(_sample(x, v_fold, 1.0 - x ** 2 / 4.0 - x ** 3 / 8.0, x ** 4))
    elif which == "corner_a1":
        if np.any(xs <= 0.0) or np.any(xs > 0.2):
            raise OutOfDomain("corner_a1 samples (1 - a) must lie in (0, 0.2]")
        points = [branch_point(Branch.B, Params(a=1.0 - x, d=d_minus(1.0 - x))) for x in xs]
        computed = np.array([p[0] for p in points])
        expansion = xs ** 2 / 4.0 + xs ** 3 / 8.0
        scales = xs ** 4
        resolution = 1e-8
        for x, p in zip(xs, points):
            extras.append(_sample(x, p[1], 1.0 - x / 2.0, x ** 4))
    elif which == "cusp":
        if np.any(xs <= 0.0) or np.any(xs > 5e-3):
            raise OutOfDomain("cusp samples (1/24 - d) must lie in (0, 5e-3]")
        computed = np.array([a_minus(1.0 / 24.0 - x) for x in xs])
        expansion = 0.5 - np.sqrt(1152.0 * xs ** 3)
        scales = xs ** 2
        resolution = 1e-11
    else:
        raise ValueError(f"Unknown expansion {which!r}")

    errors = np.abs(computed - expansion)
    ratios, bound, passed = _bounded_ratios(list(xs), errors, scales, resolution)
    rows = [
        AsymptoticSample(sample=float(x), computed=float(c), expansion=float(e), error=float(err), ratio=float(r))
        for x, c, e, err, r in zip(xs, computed, expansion, errors, ratios)
    ]
    logger.info(f"Asymptotics {which}: max ratio {float(np.max(ratios)) if ratios.size else 0.0:.4g}, bound {bound:.4g}")
    return AsymptoticReport(which=which, samples=rows, bound=bound, passed=passed, extras=extras)


def _sample(x: float, computed: float, expansion: float, scale: float) -> AsymptoticSample:
    error = abs(computed - expansion)
    return AsymptoticSample(
        sample=float(x), computed=float(computed), expansion=float(expansion),
        error=float(error), ratio=float(error / scale) if scale > 0.0 else 0.0,
    )
