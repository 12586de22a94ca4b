"""
Time integration of the Nagumo lattice equation

    du_j/dt = d (u_{j-1} - 2 u_j + u_{j+1}) + g(u_j; a)

on a finite lattice whose ends are clamped to the limiting states, together
with the initial conditions, front-speed measurement and the colliding-front
experiment.
"""

import csv
import logging
from typing import List, Optional

import numpy as np
from scipy.stats import linregress

from config import config
from cubic_geometry import eval_g
from equilibria import branch_point
from exceptions import BlowUp, NoInterface, OutOfDomain
from models import (
    Branch,
    CollisionReport,
    ICKind,
    LatticeState,
    Params,
    SimConfig,
    SpeedClass,
    SpeedEstimate,
    Verdict,
)
from wave_criteria import classify, classify_upper

logger = logging.getLogger(__name__)

BLOW_UP_LIMIT = 2.0
SANITY_BAND = (-0.05, 1.05)
# Sites at either end excluded from interface tracking
EDGE_SITES = 8
MIN_SPEED_SAMPLES = 20
TRANSIENT_FRACTION = 0.25


def tiled_pattern(params: Params, N: int, offset: int = 0) -> np.ndarray:
    """The stable pattern laid out on sites offset, ..., offset + N - 1 with u_B on even sites"""
    u_b, v_b = branch_point(Branch.B, params)
    j = np.arange(offset, offset + N)
    return np.where(j % 2 == 0, u_b, v_b)


def rhs(state: LatticeState, params: Params) -> np.ndarray:
    """Right-hand side of the lattice equation with clamped ghost values at j = -1 and j = N"""
    u = state.u
    padded = np.concatenate(([state.left_ghost], u, [state.right_ghost]))
    return params.d * (padded[:-2] - 2.0 * u + padded[2:]) + eval_g(u, params.a)


def _rk4_step(state: LatticeState, params: Params, dt: float) -> np.ndarray:
    u = state.u
    k1 = rhs(state, params)
    k2 = rhs(state.with_values(state.t, u + 0.5 * dt * k1), params)
    k3 = rhs(state.with_values(state.t, u + 0.5 * dt * k2), params)
    k4 = rhs(state.with_values(state.t, u + dt * k3), params)
    return u + dt * (k1 + 2.0 * (k2 + k3) + k4) / 6.0


def integrate(state: LatticeState, params: Params, sim_config: SimConfig) -> List[LatticeState]:
    """
    Classical fixed-step RK4 from state.t to state.t + t_end.

    Args:
        state: Initial lattice state with its ghost values
        params: Lattice parameters
        sim_config: Step size, horizon and recording stride

    Returns:
        Trajectory holding the initial state, every record_stride-th state
        and the final state

    Raises:
        ValueError: If the lattice size or step size does not fit params
        BlowUp: If any |u_j| exceeds 2
    """
    if state.N != sim_config.N:
        raise ValueError(f"State has {state.N} sites, configuration expects {sim_config.N}")
    if not sim_config.stable_for(params):
        raise ValueError(f"dt={sim_config.dt} exceeds 0.2/(4d+1) at d={params.d}")

    dt = sim_config.dt
    n_steps = int(np.ceil(sim_config.t_end / dt - 1e-9))
    trajectory = [state]
    current = state
    warned = False
    for step in range(1, n_steps + 1):
        current = current.with_values(state.t + step * dt, _rk4_step(current, params, dt))
        peak = float(np.max(np.abs(current.u)))
        if not np.isfinite(peak) or peak > BLOW_UP_LIMIT:
            logger.error(f"Blow-up at t={current.t:.3f} (max |u| = {peak:.3e}, dt={dt})")
            raise BlowUp(f"|u_j| reached {peak:.3e} at t={current.t:.3f}; reduce dt")
        if not warned and (current.u.min() < SANITY_BAND[0] or current.u.max() > SANITY_BAND[1]):
            logger.warning(f"State left the band {SANITY_BAND} at t={current.t:.3f}")
            warned = True
        if step % sim_config.record_stride == 0 or step == n_steps:
            trajectory.append(current)

    logger.info(f"Integrated {n_steps} steps to t={current.t:.3f}, {len(trajectory)} samples")
    return trajectory


def _ramp(N: int, center: float, width: float) -> np.ndarray:
    return 0.5 * (1.0 + np.tanh((np.arange(N) - center) / width))


def build_ic(kind: ICKind, params: Params, sim_config: SimConfig,
             center: Optional[float] = None, width: float = 2.0) -> LatticeState:
    """
    Initial conditions built from tanh ramps.

    BICHROMATIC_FRONT is 0 on the left and the stable pattern on the right,
    UPPER_BICHROMATIC_FRONT is the pattern on the left and 1 on the right,
    MONOCHROMATIC_FRONT joins 0 to 1, PLATEAU is 0 -> pattern -> 1 with
    ramps at N/3 and 2N/3, and PATTERN is the tiled pattern itself.

    Raises:
        OutOfDomain: If a kind that uses the pattern is requested where
            branch B does not exist
    """
    N = sim_config.N
    center = N / 2.0 if center is None else center
    if width <= 0.0:
        raise ValueError(f"Ramp width must be positive, got {width}")

    if kind == ICKind.MONOCHROMATIC_FRONT:
        return LatticeState(t=0.0, u=_ramp(N, center, width), left_ghost=0.0, right_ghost=1.0)

    pattern = tiled_pattern(params, N)
    u_b, v_b = pattern[0], pattern[1]
    if kind == ICKind.BICHROMATIC_FRONT:
        u = pattern * _ramp(N, center, width)
        return LatticeState(t=0.0, u=u, left_ghost=0.0, right_ghost=u_b)
    if kind == ICKind.UPPER_BICHROMATIC_FRONT:
        u = pattern + (1.0 - pattern) * _ramp(N, center, width)
        return LatticeState(t=0.0, u=u, left_ghost=v_b, right_ghost=1.0)
    if kind == ICKind.PLATEAU:
        u = pattern * _ramp(N, N / 3.0, width) + (1.0 - pattern) * _ramp(N, 2.0 * N / 3.0, width)
        return LatticeState(t=0.0, u=u, left_ghost=0.0, right_ghost=1.0)
    if kind == ICKind.PATTERN:
        return LatticeState(t=0.0, u=pattern.copy(), left_ghost=v_b, right_ghost=u_b)
    raise OutOfDomain(f"Unknown initial condition kind {kind!r}")


def interface_position(state: LatticeState, level: float) -> float:
    """
    Site where the even sublattice first rises through level, by linear interpolation.

    Raises:
        NoInterface: If no crossing exists away from the lattice ends
    """
    sites = np.arange(0, state.N, 2)
    values = state.u[0::2]
    interior = (sites >= EDGE_SITES) & (sites < state.N - EDGE_SITES)
    sites, values = sites[interior], values[interior]
    crossings = np.nonzero((values[:-1] < level) & (values[1:] >= level))[0]
    if crossings.size == 0:
        raise NoInterface(f"No crossing of level {level!r} at t={state.t:.3f}")
    i = int(crossings[0])
    fraction = (level - values[i]) / (values[i + 1] - values[i])
    return float(sites[i] + 2.0 * fraction)


def _classify_speed(c: float, r_squared: float, displacement: float) -> SpeedClass:
    if abs(c) < config.PIN_THRESHOLD and displacement < 1.0:
        return SpeedClass.PINNED
    if abs(c) > config.TRAVEL_THRESHOLD and r_squared > 0.99:
        return SpeedClass.TRAVELLING
    return SpeedClass.INCONCLUSIVE


def interface_track(trajectory: List[LatticeState], params: Params):
    """Times and interface positions of the lower front, tracked at level u_B / 2"""
    u_b, _ = branch_point(Branch.B, params)
    times = np.array([state.t for state in trajectory])
    positions = np.array([interface_position(state, 0.5 * u_b) for state in trajectory])
    return times, positions


def estimate_speed(trajectory: List[LatticeState], params: Params) -> SpeedEstimate:
    """
    Least-squares speed of the lower bichromatic front in sites per unit time.

    The first quarter of the trajectory is discarded as transient; at least
    twenty samples must remain.

    Raises:
        ValueError: If too few samples remain
        NoInterface: If some sample has no crossing
    """
    kept = trajectory[int(len(trajectory) * TRANSIENT_FRACTION):]
    if len(kept) < MIN_SPEED_SAMPLES:
        raise ValueError(f"Need {MIN_SPEED_SAMPLES} samples after the transient, got {len(kept)}")
    times, positions = interface_track(kept, params)
    fit = linregress(times, positions)
    c = float(fit.slope)
    r_squared = float(fit.rvalue) ** 2
    displacement = float(abs(positions[-1] - positions[0]))
    estimate = SpeedEstimate(
        c=c, r_squared=r_squared, stderr=float(fit.stderr), displacement=displacement,
        samples=len(kept), classification=_classify_speed(c, r_squared, displacement),
    )
    logger.info(f"Speed at a={params.a}, d={params.d}: c={c:.6g} ({estimate.classification.value})")
    return estimate


def estimate_upper_speed(trajectory: List[LatticeState], params: Params) -> SpeedEstimate:
    """
    Speed of the upper front (pattern -> 1) at params.

    Applies u -> 1 - u, j -> N - 1 - j, which turns it into a lower front at
    (1 - a, d), and negates the measured speed.
    """
    flipped = [
        LatticeState(t=s.t, u=1.0 - s.u[::-1], left_ghost=1.0 - s.right_ghost, right_ghost=1.0 - s.left_ghost)
        for s in trajectory
    ]
    lower = estimate_speed(flipped, params.mirrored())
    return lower.model_copy(update={"c": -lower.c})


def buffer_width(u: np.ndarray, flat_tol: float = 1e-3, jump: float = 0.1) -> int:
    """Longest run of sites showing the 2-periodic signature |u_{j+2} - u_j| small, |u_{j+1} - u_j| large"""
    periodic = (np.abs(u[2:] - u[:-2]) < flat_tol) & (np.abs(u[1:-1] - u[:-2]) > jump)
    longest = run = 0
    for flag in periodic:
        run = run + 1 if flag else 0
        longest = max(longest, run)
    return longest


def run_collision(params: Params, sim_config: SimConfig, override: bool = False,
                  width: float = 2.0) -> CollisionReport:
    """
    Let a lower and an upper bichromatic front run into each other.

    Starts from the 0 -> pattern -> 1 plateau and records the width of the
    periodic buffer zone between the two interfaces.

    Args:
        params: Lattice parameters
        sim_config: Integration settings
        override: Skip the check that both fronts are proven to travel
        width: Width of the tanh ramps

    Raises:
        OutOfDomain: If the fronts are not proven to travel and override is False
    """
    if not override:
        lower, upper = classify(params), classify_upper(params)
        if lower.verdict != Verdict.PROVEN_TRAVELLING or upper.verdict != Verdict.PROVEN_TRAVELLING:
            raise OutOfDomain(
                f"Colliding fronts need travelling lower and upper fronts at a={params.a}, d={params.d} "
                f"(got {lower.verdict.value}, {upper.verdict.value})"
            )

    trajectory = integrate(build_ic(ICKind.PLATEAU, params, sim_config, width=width), params, sim_config)
    widths = [buffer_width(state.u) for state in trajectory]
    start = int(0.1 * len(widths))
    tail = widths[start:]
    # Interfaces move by whole sites, so the width may flicker by a site or two
    running_min = np.minimum.accumulate(tail) if tail else np.array([])
    non_increasing = bool(np.all(np.asarray(tail) <= running_min + 2)) if tail else True

    final = trajectory[-1]
    residual = float(np.max(np.abs(rhs(final, params))))
    monotone = bool(np.all(np.diff(final.u) >= -1e-4))
    outcome = monotone and widths[-1] == 0 and final.u[0] < 0.01 and final.u[-1] > 0.99
    logger.info(f"Collision at a={params.a}, d={params.d}: final buffer {widths[-1]}, residual {residual:.3e}")
    return CollisionReport(
        times=[state.t for state in trajectory], buffer_widths=widths,
        buffer_non_increasing=non_increasing, final_residual=residual,
        monochromatic_outcome=bool(outcome),
    )


def write_trajectory_csv(trajectory: List[LatticeState], path: str) -> None:
    """Write rows t,j,u for every recorded state"""
    try:
        with open(path, "w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(["t", "j", "u"])
            for state in trajectory:
                for j, value in enumerate(state.u):
                    writer.writerow([repr(float(state.t)), j, repr(float(value))])
    except OSError as e:
        raise OSError(f"Cannot write trajectory to {path}: {e}") from e


def write_interface_csv(trajectory: List[LatticeState], params: Params, path: str) -> None:
    """Write rows t,interface_pos for the lower front"""
    times, positions = interface_track(trajectory, params)
    try:
        with open(path, "w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(["t", "interface_pos"])
            for t, x in zip(times, positions):
                writer.writerow([repr(float(t)), repr(float(x))])
    except OSError as e:
        raise OSError(f"Cannot write interface track to {path}: {e}") from e
