import os
from dataclasses import dataclass, fields, replace
from typing import Any, Dict, Optional
from dotenv import dotenv_values, load_dotenv

# Load environment variables from .env file in project root
load_dotenv(dotenv_path="../.env")


def _env_int(name: str, default: int) -> int:
    return int(os.getenv(name, default))


def _env_float(name: str, default: float) -> float:
    return float(os.getenv(name, default))


@dataclass
class Config:
    """Configuration settings for the lattice laboratory"""
    LOG_LEVEL: str = os.getenv("LOG_LEVEL", "WARNING")
    WORKERS: int = _env_int("WORKERS", 1)  # Processes used by region scans

    # Equilibrium and bifurcation settings
    ROOT_SAMPLES: int = _env_int("ROOT_SAMPLES", 2000)      # Sample points on [0, a] for intersection searches
    BOUNDARY_TOL: float = _env_float("BOUNDARY_TOL", 1e-7)  # Refuse root counts this close to d_-, d_+
    D_MINUS_TOL: float = _env_float("D_MINUS_TOL", 1e-12)   # Bisection interval width for d_-(a)

    # Wave criteria settings
    U_BOT_SAMPLES: int = _env_int("U_BOT_SAMPLES", 4000)    # Scan points for the rightmost crossing

    # Lattice simulation settings
    SIM_N: int = _env_int("SIM_N", 512)
    SIM_DT_MAX: float = _env_float("SIM_DT_MAX", 0.1)
    SIM_T_END: float = _env_float("SIM_T_END", 2000.0)
    SIM_RECORD_STRIDE: int = _env_int("SIM_RECORD_STRIDE", 50)
    PIN_THRESHOLD: float = _env_float("PIN_THRESHOLD", 1e-4)       # Sites per unit time
    TRAVEL_THRESHOLD: float = _env_float("TRAVEL_THRESHOLD", 1e-3)

    # Standing front settings
    NEWTON_MAX_STEPS: int = _env_int("NEWTON_MAX_STEPS", 100)
    NEWTON_RETRIES: int = _env_int("NEWTON_RETRIES", 10)
    NEWTON_TOL: float = _env_float("NEWTON_TOL", 1e-10)

    # Region scan settings
    SCAN_SIM_N: int = _env_int("SCAN_SIM_N", 256)
    SCAN_SIM_T_END: float = _env_float("SCAN_SIM_T_END", 1000.0)
    SCAN_SEED: int = _env_int("SCAN_SEED", 0)

    @classmethod
    def from_file(cls, path: str, overrides: Optional[Dict[str, Any]] = None) -> "Config":
        """
        Build a configuration from a plain-text key=value file.

        Args:
            path: File with one KEY=value pair per line
            overrides: Values that win over the file (typically CLI flags)

        Returns:
            Config with file values and overrides applied on top of the defaults

        Raises:
            FileNotFoundError: If path does not exist
            ValueError: If the file names an unknown key or a value does not parse
        """
        if not os.path.isfile(path):
            raise FileNotFoundError(f"Configuration file not found: {path}")
        values = {key.upper(): value for key, value in dotenv_values(path).items()}
        if overrides:
            values.update({key.upper(): value for key, value in overrides.items() if value is not None})
        return cls().with_values(values)

    def with_values(self, values: Dict[str, Any]) -> "Config":
        """Return a copy with the given fields replaced, coercing to the declared types"""
        known = {f.name: f for f in fields(self)}
        unknown = sorted(set(values) - set(known))
        if unknown:
            raise ValueError(f"Unknown configuration keys: {', '.join(unknown)}")

        coerced = {}
        for name, raw in values.items():
            field_type = known[name].type
            caster = {"int": int, "float": float, "str": str}.get(
                field_type if isinstance(field_type, str) else field_type.__name__, str
            )
            try:
                coerced[name] = caster(raw)
            except (TypeError, ValueError) as e:
                raise ValueError(f"Invalid value for {name}: {raw!r}") from e
        return replace(self, **coerced)

    def update_from(self, other: "Config") -> None:
        """Copy every field of other into this instance, so modules holding `config` see the change"""
        for f in fields(self):
            setattr(self, f.name, getattr(other, f.name))


config = Config()
