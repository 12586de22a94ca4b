"""
Standing bichromatic fronts.

A stationary lattice solution satisfies u_{j+1} + u_{j-1} = 2 m(u_j). Reading
it in pairs (u_i, v_i) = (u_{2i}, u_{2i+1}) gives a planar map built from two
reflections through the m-map curves, whose heteroclinic orbits from (0, 0)
to (u_B, v_B) are the standing fronts. find_standing_front computes such a
front directly by Newton's method on the truncated stationary system.
"""

import csv
import logging
from typing import List, Optional, Tuple

import numpy as np
from scipy.linalg import solve_banded

from config import config
from cubic_geometry import eval_g, m_map
from equilibria import branch_point, count_roots
from exceptions import NoInterface, NotFound, OutOfDomain
from lattice_sim import build_ic, integrate, interface_position, rhs, tiled_pattern
from models import Branch, ICKind, LatticeState, Params, PlanarOrbit, SimConfig, StandingProfile
from wave_criteria import u_top, v_bot_top

logger = logging.getLogger(__name__)

Point = Tuple[float, float]

MONOTONE_SLACK = 1e-9
RELAX_TIME = 400.0


def reflection_step(point: Point, params: Params) -> Point:
    """(u, v) -> (u', v') with u' = 2 m(v) - u, then v' = 2 m(u') - v"""
    u, v = point
    u_next = 2.0 * float(m_map(v, params)) - u
    v_next = 2.0 * float(m_map(u_next, params)) - v
    return u_next, v_next


def reflection_step_inverse(point: Point, params: Params) -> Point:
    """Undo reflection_step: v = 2 m(u') - v', then u = 2 m(v) - u'"""
    u_next, v_next = point
    v = 2.0 * float(m_map(u_next, params)) - v_next
    u = 2.0 * float(m_map(v, params)) - u_next
    return u, v


def _residual(u: np.ndarray, params: Params, right: float) -> np.ndarray:
    return rhs(LatticeState(t=0.0, u=u, left_ghost=0.0, right_ghost=right), params)


def _newton(seed: np.ndarray, params: Params, right: float) -> Optional[Tuple[np.ndarray, float]]:
    """Damped Newton on the stationary system; None when it stalls or runs out of steps"""
    u = seed.copy()
    F = _residual(u, params, right)
    norm = float(np.max(np.abs(F)))
    banded = np.zeros((3, u.size))
    banded[0, 1:] = params.d
    banded[2, :-1] = params.d

    for step in range(config.NEWTON_MAX_STEPS):
        if norm < config.NEWTON_TOL:
            # A couple of extra steps take the residual to rounding level
            for _ in range(2):
                banded[1] = -2.0 * params.d + eval_g(u, params.a, 1)
                candidate = u + solve_banded((1, 1), banded, -F)
                candidate_F = _residual(candidate, params, right)
                if np.max(np.abs(candidate_F)) >= norm:
                    break
                u, F, norm = candidate, candidate_F, float(np.max(np.abs(candidate_F)))
            logger.debug(f"Newton converged in {step} steps, residual {norm:.3e}")
            return u, norm

        banded[1] = -2.0 * params.d + eval_g(u, params.a, 1)
        try:
            delta = solve_banded((1, 1), banded, -F)
        except (np.linalg.LinAlgError, ValueError) as e:
            logger.debug(f"Singular Newton system at step {step}: {e}")
            return None

        damping = 1.0
        while damping > 1e-3:
            candidate = u + damping * delta
            candidate_F = _residual(candidate, params, right)
            candidate_norm = float(np.max(np.abs(candidate_F)))
            if candidate_norm < norm:
                break
            damping *= 0.5
        else:
            logger.debug(f"Newton stalled at step {step}, residual {norm:.3e}")
            return None
        u, F, norm = candidate, candidate_F, candidate_norm
    return None


def _admissible(u: np.ndarray, params: Params) -> bool:
    if u.min() < -MONOTONE_SLACK or u.max() > 1.0 + MONOTONE_SLACK:
        return False
    if np.any(np.diff(u[0::2]) < -MONOTONE_SLACK) or np.any(np.diff(u[1::2]) < -MONOTONE_SLACK):
        return False
    u_b, _ = branch_point(Branch.B, params)
    margin = max(8, u.size // 16)
    try:
        position = interface_position(LatticeState(t=0.0, u=u), 0.5 * u_b)
    except NoInterface:
        return False
    return margin <= position <= u.size - margin


def _seeds(params: Params, N: int, shift: int):
    pattern = tiled_pattern(params, N)
    center = N // 2 + shift
    step = np.where(np.arange(N) >= center, pattern, 0.0)
    yield "step", step
    for k in range(1, config.NEWTON_RETRIES + 1):
        ramp = 0.5 * (1.0 + np.tanh((np.arange(N) - center + 0.5) / (0.5 * k)))
        yield f"tanh width {0.5 * k}", pattern * ramp
    if N >= 128:
        sim_config = SimConfig.for_params(params, N=N, t_end=RELAX_TIME, record_stride=10**6)
        state = build_ic(ICKind.BICHROMATIC_FRONT, params, sim_config, center=center)
        yield "relaxed", integrate(state, params, sim_config)[-1].u


def find_standing_front(params: Params, N: int, shift: int = 0) -> StandingProfile:
    """
    Newton solve of the stationary lattice system on N sites.

    The left end is clamped to 0 and the right end to the stable pattern.
    The first seed is a step at N/2 + shift; on failure tanh-smoothed seeds of
    growing width are tried, then a state relaxed by time integration. A
    converged profile must stay in [0, 1], be non-decreasing on both
    sublattices and have its interface away from the ends.

    Args:
        params: Parameters inside the nine-root region
        N: Even number of sites, at least 64
        shift: Offset of the seed step from the middle

    Returns:
        StandingProfile with residual below NEWTON_TOL

    Raises:
        OutOfDomain: If N is invalid or params lie outside the nine-root region
        NotFound: If no seed converges to an admissible profile, which is
            evidence (not proof) that the front travels
    """
    if N < 64 or N % 2:
        raise OutOfDomain(f"Standing fronts need an even N >= 64, got {N}")
    if count_roots(params) != 9:
        raise OutOfDomain(f"No stable pattern at a={params.a}, d={params.d}")
    right = tiled_pattern(params, 1, offset=N)[0]

    for name, seed in _seeds(params, N, shift):
        result = _newton(seed, params, right)
        if result is None:
            logger.warning(f"Newton failed from {name} seed at a={params.a}, d={params.d}")
            continue
        u, norm = result
        if _admissible(u, params):
            logger.info(f"Standing front at a={params.a}, d={params.d} from {name} seed, residual {norm:.3e}")
            return StandingProfile(u=u, params=params, residual_norm=norm, left_ghost=0.0, right_ghost=right)
        logger.warning(f"Solution from {name} seed is not an admissible front")

    logger.error(f"No standing front found at a={params.a}, d={params.d}, N={N}")
    raise NotFound(
        f"No standing front at a={params.a}, d={params.d} from any seed; "
        "this is evidence of a travelling front, not a proof"
    )


def orbit_from_profile(profile: StandingProfile, max_residual: float = 1e-8) -> PlanarOrbit:
    """Pairs (u_i, v_i) = (u_{2i}, u_{2i+1}) of a stationary profile"""
    if profile.residual_norm > max_residual:
        raise ValueError(f"Profile residual {profile.residual_norm:.3e} exceeds {max_residual:.1e}")
    u = np.asarray(profile.u, dtype=float)
    pairs = u[: 2 * (u.size // 2)].reshape(-1, 2)
    return PlanarOrbit(points=pairs, params=profile.params)


def recurrence_residual(orbit: PlanarOrbit) -> float:
    """Largest mismatch between consecutive orbit points and reflection_step"""
    worst = 0.0
    for current, following in zip(orbit.points[:-1], orbit.points[1:]):
        image = reflection_step((float(current[0]), float(current[1])), orbit.params)
        worst = max(worst, float(np.max(np.abs(np.array(image) - following))))
    return worst


def jump_indices(orbit: PlanarOrbit) -> List[int]:
    """Indices i with v_i <= v_bot and v_{i+1} >= v_top"""
    v_bot, v_top = v_bot_top(orbit.params)
    v = orbit.points[:, 1]
    return [int(i) for i in np.nonzero((v[:-1] <= v_bot) & (v[1:] >= v_top))[0]]


def dichotomy_holds(orbit: PlanarOrbit, tol: float = 1e-8) -> bool:
    """Every point lies in [0, u_B] x [0, v_bot] or in [u_top, u_B] x [v_top, v_B]"""
    params = orbit.params
    u_b, v_b = branch_point(Branch.B, params)
    v_bot, v_top = v_bot_top(params)
    top = u_top(params)
    u, v = orbit.points[:, 0], orbit.points[:, 1]
    low = (u >= -tol) & (u <= u_b + tol) & (v >= -tol) & (v <= v_bot + tol)
    high = (u >= top - tol) & (u <= u_b + tol) & (v >= v_top - tol) & (v <= v_b + tol)
    return bool(np.all(low | high))


def write_profile_csv(profile: StandingProfile, path: str) -> None:
    """Write rows j,u_j"""
    try:
        with open(path, "w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(["j", "u_j"])
            for j, value in enumerate(profile.u):
                writer.writerow([j, repr(float(value))])
    except OSError as e:
        raise OSError(f"Cannot write profile to {path}: {e}") from e
