from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional
import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator


class Params(BaseModel):
    """A point (a, d) in parameter space: detuning a of the cubic and lattice coupling d"""
    model_config = ConfigDict(frozen=True)

    a: float = Field(gt=0.0, lt=1.0)
    d: float = Field(ge=0.0)

    @property
    def coupled(self) -> bool:
        """Whether d > 0, which the m-map and all wave criteria require"""
        return self.d > 0.0

    def mirrored(self) -> "Params":
        """Parameters under the symmetry a -> 1 - a"""
        return Params(a=1.0 - self.a, d=self.d)


class CubicCriticalPoints(BaseModel):
    """Local minimum, inflection point and local maximum of g(.; a)"""
    u_min: float
    u_infl: float
    u_max: float


class Branch(str, Enum):
    """Labels of the roots of G(u, v; a, d) = 0"""
    ZERO = "Zero"
    MONO_A = "Mono_a"
    ONE = "One"
    A = "A"
    B = "B"
    C = "C"
    D = "D"
    SWAPPED_A = "SwappedA"
    SWAPPED_B = "SwappedB"
    SWAPPED_C = "SwappedC"
    SWAPPED_D = "SwappedD"

    def swapped(self) -> "Branch":
        """Label of the root obtained by exchanging u and v"""
        pairs = {
            Branch.A: Branch.SWAPPED_A, Branch.B: Branch.SWAPPED_B,
            Branch.C: Branch.SWAPPED_C, Branch.D: Branch.SWAPPED_D,
        }
        pairs.update({value: key for key, value in pairs.items()})
        return pairs.get(self, self)


class Stability(str, Enum):
    """Linear stability class of an equilibrium of (u', v') = G(u, v)"""
    STABLE_NODE = "StableNode"
    SADDLE = "Saddle"
    UNSTABLE_NODE = "UnstableNode"
    DEGENERATE = "Degenerate"


class Equilibrium(BaseModel):
    """A root of G = 0 with its branch label and stability class"""
    u: float
    v: float
    branch: Branch
    stability: Stability


class BranchSample(BaseModel):
    """One point of a traced branch in the (d, u, v) branch diagram"""
    branch: Branch
    d: float
    u: float
    v: float


class BifurcationCurves(BaseModel):
    """Values of the bifurcation curves at a single detuning a"""
    a: float
    d_minus: float
    d_plus: float


class AsymptoticSample(BaseModel):
    """One comparison between a computed quantity and its leading-order expansion"""
    sample: float
    computed: float
    expansion: float
    error: float
    ratio: float  # error divided by the expected order of the remainder


class AsymptoticReport(BaseModel):
    """Outcome of an asymptotic expansion check over several samples"""
    which: str
    samples: List[AsymptoticSample]
    bound: float
    passed: bool
    extras: List[AsymptoticSample] = []  # Secondary expansions reported alongside


class Verdict(str, Enum):
    """Outcome of the analytic pinning and propagation criteria"""
    PROVEN_PINNED = "ProvenPinned"
    PROVEN_TRAVELLING = "ProvenTravelling"
    UNDETERMINED = "Undetermined"
    OUTSIDE_DOMAIN = "OutsideDomain"


class CriterionReport(BaseModel):
    """Everything the criteria computed at one (a, d)"""
    params: Params
    in_omega_minus: bool
    root_count: Optional[int] = None
    pinned_bound: float
    v_bot: Optional[float] = None
    v_top: Optional[float] = None
    u_top: Optional[float] = None
    u_bot: Optional[float] = None
    gamma_at_dminus: Optional[float] = None
    travelling_test_passed: Optional[bool] = None  # u_bot < u_top
    simplified_test_passed: Optional[bool] = None  # reflect_v(u_top) > v_bot
    decided_by_simplified_test: bool = False
    verdict: Verdict
    note: Optional[str] = None


@dataclass
class PlanarOrbit:
    """Sequence of (u_i, v_i) pairs of the two-reflection recurrence"""
    points: np.ndarray  # shape (n, 2)
    params: Params

    def __len__(self) -> int:
        return len(self.points)


@dataclass
class StandingProfile:
    """Stationary lattice profile together with its clamped boundary values"""
    u: np.ndarray
    params: Params
    residual_norm: float
    left_ghost: float = 0.0
    right_ghost: float = 0.0


class Boundary(str, Enum):
    """Boundary treatment of the truncated lattice"""
    CLAMPED_TO_LIMITS = "ClampedToLimits"


class SimConfig(BaseModel):
    """Lattice size, step size and recording cadence of a time integration"""
    N: int = Field(ge=128)
    dt: float = Field(gt=0.0)
    t_end: float = Field(gt=0.0)
    boundary: Boundary = Boundary.CLAMPED_TO_LIMITS
    record_stride: int = Field(default=50, ge=1)

    @model_validator(mode="after")
    def _even_lattice(self) -> "SimConfig":
        if self.N % 2:
            raise ValueError(f"Lattice size must be even, got N={self.N}")
        return self

    @staticmethod
    def stable_dt(d: float, dt_max: float = 0.1) -> float:
        """Largest step allowed by the explicit-stability heuristic"""
        return min(dt_max, 0.2 / (4.0 * d + 1.0))

    @classmethod
    def for_params(cls, params: Params, N: int = 512, t_end: float = 2000.0,
                   record_stride: int = 50, dt_max: float = 0.1) -> "SimConfig":
        """Configuration with the default step size for the given coupling"""
        return cls(N=N, dt=cls.stable_dt(params.d, dt_max), t_end=t_end, record_stride=record_stride)

    def stable_for(self, params: Params) -> bool:
        return self.dt <= 0.2 / (4.0 * params.d + 1.0) + 1e-15


@dataclass
class LatticeState:
    """Lattice values at time t; ghosts are the clamped values at j = -1 and j = N"""
    t: float
    u: np.ndarray
    left_ghost: float = 0.0
    right_ghost: float = 0.0

    @property
    def N(self) -> int:
        return len(self.u)

    def with_values(self, t: float, u: np.ndarray) -> "LatticeState":
        return LatticeState(t=t, u=u, left_ghost=self.left_ghost, right_ghost=self.right_ghost)


class ICKind(str, Enum):
    """Initial conditions understood by lattice_sim.build_ic"""
    BICHROMATIC_FRONT = "bichromatic"
    UPPER_BICHROMATIC_FRONT = "upper"
    MONOCHROMATIC_FRONT = "mono"
    PLATEAU = "plateau"
    PATTERN = "pattern"


class SpeedClass(str, Enum):
    TRAVELLING = "Travelling"
    PINNED = "Pinned"
    INCONCLUSIVE = "Inconclusive"


class SpeedEstimate(BaseModel):
    """Least-squares front speed in sites per unit time"""
    c: float
    r_squared: float
    stderr: float
    displacement: float
    samples: int
    classification: SpeedClass


class CollisionReport(BaseModel):
    """Evolution of the periodic buffer zone between two colliding fronts"""
    times: List[float]
    buffer_widths: List[int]
    buffer_non_increasing: bool
    final_residual: float
    monochromatic_outcome: bool


class SimulatePolicy(str, Enum):
    NEVER = "never"
    ON_UNDETERMINED = "undetermined"
    ALWAYS = "always"


class CellRecord(BaseModel):
    """Scan result for one (a, d) cell"""
    root_count: Optional[int] = None
    criterion: Verdict
    gamma: Optional[float] = None
    sim_speed: Optional[float] = None
    sim_class: Optional[SpeedClass] = None


@dataclass
class RegionGrid:
    """Rectangular (a, d) grid of scan results; cells[i][k] belongs to (a_axis[i], d_axis[k])"""
    a_axis: np.ndarray
    d_axis: np.ndarray
    cells: List[List[CellRecord]] = field(default_factory=list)

    def __post_init__(self):
        self.a_axis = np.asarray(self.a_axis, dtype=float)
        self.d_axis = np.asarray(self.d_axis, dtype=float)
        for name, axis in (("a_axis", self.a_axis), ("d_axis", self.d_axis)):
            if axis.size > 1 and not np.all(np.diff(axis) > 0):
                raise ValueError(f"{name} must be strictly increasing")
        if len(self.cells) != self.a_axis.size or any(len(row) != self.d_axis.size for row in self.cells):
            raise ValueError(
                f"cells must have shape {self.a_axis.size} x {self.d_axis.size}"
            )

    @property
    def shape(self):
        return self.a_axis.size, self.d_axis.size


class CheckResult(BaseModel):
    """One acceptance check run by the verify command"""
    name: str
    passed: bool
    detail: str
