"""
Parameter-region scans over an (a, d) grid.

Each cell gets its root count and analytic verdict; a seeded subset of
cells is also simulated according to the policy. Rows of constant a are
independent work items mapped over a process pool, and results are collected
in cell order, so repeated runs with the same configuration produce identical CSV files.
"""

import csv
import itertools
import logging
from multiprocessing import Pool
from typing import List, Optional, Sequence, Tuple

import numpy as np

from config import config
from exceptions import CriteriaConflict, LatticeLabError
from lattice_sim import build_ic, estimate_speed, integrate
from models import (
    CellRecord,
    ICKind,
    Params,
    RegionGrid,
    SimConfig,
    SimulatePolicy,
    SpeedClass,
    Verdict,
)
from wave_criteria import classify

logger = logging.getLogger(__name__)

CSV_COLUMNS = ["a", "d", "root_count", "criterion", "gamma", "sim_speed", "sim_class"]
MAX_RESOLUTION = 512
MAX_D = 0.07


def cell_axis(lo: float, hi: float, resolution: int) -> np.ndarray:
    """Cell centres of resolution equal cells on [lo, hi]"""
    return lo + (np.arange(resolution) + 0.5) * (hi - lo) / resolution


def criteria_cell(point: Tuple[float, float]) -> CellRecord:
    """Root count, verdict and Gamma(a) at one grid point"""
    a, d = point
    try:
        report = classify(Params(a=a, d=d))
    except (LatticeLabError, ValueError) as e:
        logger.warning(f"Cell ({a}, {d}) failed: {e}")
        return CellRecord(criterion=Verdict.OUTSIDE_DOMAIN)
    return CellRecord(root_count=report.root_count, criterion=report.verdict, gamma=report.gamma_at_dminus)


def criteria_row(job: Tuple[float, Tuple[float, ...]]) -> List[CellRecord]:
    """
    Cells of one a-row. Quantities that depend on a alone (d_-(a), Gamma(a))
    are cached per process, so a row costs them once.
    """
    a, d_values = job
    return [criteria_cell((a, d)) for d in d_values]


def simulate_cell(job: Tuple[float, float, int, float]) -> Tuple[Optional[float], Optional[SpeedClass]]:
    """Lower-front speed at one grid point from the bichromatic initial condition"""
    a, d, N, t_end = job
    params = Params(a=a, d=d)
    sim_config = SimConfig.for_params(params, N=N, t_end=t_end, record_stride=config.SIM_RECORD_STRIDE,
                                      dt_max=config.SIM_DT_MAX)
    try:
        trajectory = integrate(build_ic(ICKind.BICHROMATIC_FRONT, params, sim_config), params, sim_config)
        estimate = estimate_speed(trajectory, params)
    except (LatticeLabError, ValueError) as e:
        logger.warning(f"Simulation at ({a}, {d}) failed: {e}")
        return None, None
    return estimate.c, estimate.classification


def _map(function, items: List, workers: int) -> List:
    if workers <= 1 or len(items) <= 1:
        return [function(item) for item in items]
    with Pool(workers) as pool:
        return pool.map(function, items, chunksize=max(1, len(items) // (4 * workers)))


def _wants_simulation(cell: CellRecord, policy: SimulatePolicy) -> bool:
    if cell.root_count != 9:
        return False
    if policy == SimulatePolicy.ALWAYS:
        return True
    if policy == SimulatePolicy.ON_UNDETERMINED:
        return cell.criterion == Verdict.UNDETERMINED
    return False


def scan(a_range: Tuple[float, float], d_range: Tuple[float, float], resolution: int,
         simulate: SimulatePolicy = SimulatePolicy.NEVER, sim_budget: Optional[int] = None,
         seed: Optional[int] = None, workers: Optional[int] = None,
         check: bool = True) -> RegionGrid:
    """
    Classify every cell of a resolution x resolution grid.

    Args:
        a_range: (a_min, a_max) inside [0, 1]
        d_range: (d_min, d_max) inside [0, 0.07]
        resolution: Cells per axis, at most 512
        simulate: Which cells in the nine-root region are simulated
        sim_budget: Maximum number of simulated cells, drawn with a seeded generator
        seed: Seed of that generator (defaults to SCAN_SEED)
        workers: Pool size (defaults to WORKERS)
        check: Raise CriteriaConflict when a simulation contradicts a verdict

    Returns:
        RegionGrid with cells[i][k] at (a_axis[i], d_axis[k])
    """
    (a_min, a_max), (d_min, d_max) = a_range, d_range
    if not 0.0 <= a_min < a_max <= 1.0:
        raise ValueError(f"a range must satisfy 0 <= a_min < a_max <= 1, got {a_range}")
    if not 0.0 <= d_min < d_max <= MAX_D:
        raise ValueError(f"d range must satisfy 0 <= d_min < d_max <= {MAX_D}, got {d_range}")
    if not 1 <= resolution <= MAX_RESOLUTION:
        raise ValueError(f"resolution must be in 1..{MAX_RESOLUTION}, got {resolution}")
    workers = config.WORKERS if workers is None else workers
    seed = config.SCAN_SEED if seed is None else seed

    a_axis, d_axis = cell_axis(a_min, a_max, resolution), cell_axis(d_min, d_max, resolution)
    points = [(float(a), float(d)) for a, d in itertools.product(a_axis, d_axis)]
    logger.info(f"Scanning {len(points)} cells with {workers} worker(s)")
    rows = _map(criteria_row, [(float(a), tuple(float(d) for d in d_axis)) for a in a_axis], workers)
    flat = [cell for row in rows for cell in row]

    candidates = [i for i, cell in enumerate(flat) if _wants_simulation(cell, simulate)]
    if sim_budget is not None and len(candidates) > sim_budget:
        rng = np.random.default_rng(seed)
        candidates = sorted(int(i) for i in rng.choice(candidates, size=sim_budget, replace=False))
    if candidates:
        logger.info(f"Simulating {len(candidates)} cells")
        jobs = [(*points[i], config.SCAN_SIM_N, config.SCAN_SIM_T_END) for i in candidates]
        for i, (speed, speed_class) in zip(candidates, _map(simulate_cell, jobs, workers)):
            flat[i] = flat[i].model_copy(update={"sim_speed": speed, "sim_class": speed_class})

    cells = [flat[i * resolution:(i + 1) * resolution] for i in range(resolution)]
    grid = RegionGrid(a_axis=a_axis, d_axis=d_axis, cells=cells)
    if check:
        check_consistency(grid)
    return grid


def conflicts(grid: RegionGrid) -> List[Tuple[float, float, CellRecord]]:
    """Cells whose simulated class contradicts the analytic verdict"""
    found = []
    for a, d, cell in grid_rows(grid):
        if (cell.criterion == Verdict.PROVEN_PINNED and cell.sim_class == SpeedClass.TRAVELLING) or (
            cell.criterion == Verdict.PROVEN_TRAVELLING and cell.sim_class == SpeedClass.PINNED
        ):
            found.append((a, d, cell))
    return found


def check_consistency(grid: RegionGrid) -> None:
    """
    Raises:
        CriteriaConflict: Naming the first offending cell
    """
    found = conflicts(grid)
    if found:
        a, d, cell = found[0]
        logger.error(f"{len(found)} criterion/simulation conflicts, first at a={a!r}, d={d!r}")
        raise CriteriaConflict(
            f"Cell a={a!r}, d={d!r}: criterion {cell.criterion.value} but simulation "
            f"{cell.sim_class.value} (c={cell.sim_speed!r})"
        )


def _field(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    if hasattr(value, "value"):
        return value.value
    return str(value)


def write_csv(grid: RegionGrid, path: str) -> None:
    """One row per cell, a-major then d, empty fields for absent values"""
    try:
        with open(path, "w", newline="") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(CSV_COLUMNS)
            for a, d, cell in grid_rows(grid):
                writer.writerow([
                    _field(a), _field(d),
                    _field(cell.root_count), _field(cell.criterion), _field(cell.gamma),
                    _field(cell.sim_speed), _field(cell.sim_class),
                ])
    except OSError as e:
        raise OSError(f"Cannot write region grid to {path}: {e}") from e


def _optional(text: str, cast):
    return cast(text) if text != "" else None


def read_csv(path: str) -> RegionGrid:
    """Parse a file written by write_csv back into a RegionGrid"""
    try:
        with open(path, newline="") as handle:
            rows = list(csv.DictReader(handle))
    except OSError as e:
        raise OSError(f"Cannot read region grid from {path}: {e}") from e

    a_values: List[float] = []
    d_values: List[float] = []
    records: List[CellRecord] = []
    for row in rows:
        a, d = float(row["a"]), float(row["d"])
        if a not in a_values:
            a_values.append(a)
        if d not in d_values:
            d_values.append(d)
        records.append(CellRecord(
            root_count=_optional(row["root_count"], int),
            criterion=Verdict(row["criterion"]),
            gamma=_optional(row["gamma"], float),
            sim_speed=_optional(row["sim_speed"], float),
            sim_class=_optional(row["sim_class"], SpeedClass),
        ))
    width = len(d_values)
    cells = [records[i * width:(i + 1) * width] for i in range(len(a_values))]
    return RegionGrid(a_axis=np.array(a_values), d_axis=np.array(d_values), cells=cells)


def grid_rows(grid: RegionGrid) -> Sequence[Tuple[float, float, CellRecord]]:
    return [
        (float(grid.a_axis[i]), float(grid.d_axis[k]), grid.cells[i][k])
        for i, k in itertools.product(range(grid.a_axis.size), range(grid.d_axis.size))
    ]
