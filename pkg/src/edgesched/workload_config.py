"""Run configuration and workload generation.

Config files use natural units (GHz, MHz, KB, dBm) and are converted to
SI at load time; everything downstream sees seconds, cycles, bits, Hz,
and watts. Unknown keys are rejected so typos cannot silently fall back
to defaults.
"""

from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Sequence

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .errors import ConfigError
from .model import Task
from .phy import noise_psd_from_dbm

SCHEDULER_NAMES = ("optimal", "fod", "edf", "sdf", "dstar_s", "moore", "dedas")

SWEEPABLE = ("capacity_ghz", "num_users", "nearest_servers", "arrival_rate_per_s")

BITS_PER_KB = 8000.0

_TOP_DEFAULTS = {
    "area_m": [5000.0, 5000.0],
    "num_servers": 20,
    "num_users": 50,
    "arrival_rate_per_s": 3.0,
    "mean_cycles": 200e6,
    "capacity_ghz": [10.0, 20.0],
    "data_size_kb": [10.0, 5000.0],
    "deadline_s": [0.5, 5.0],
    "nearest_servers": 4,
    "horizon_s": 60.0,
    "delta_s": 0.1,
    "speed_mps": 10.0,
    "turn_prob": 0.2,
    "coverage_radius_m": 1000.0,
    "min_coverage": 2,
    "seed": 0,
    "scheduler": "fod",
    "size_key": "cycles",
    "force_offload": False,
    "drop_stale": True,
    "trace": False,
}

_RADIO_DEFAULTS = {
    "bandwidth_mhz": 20.0,
    "channels_per_server": 10,
    "tx_power_mw": 100.0,
    "noise_dbm_per_hz": -174.0,
    "pathloss_exponent": 3.0,
}


@dataclass(frozen=True)
class RadioSection:
    """Radio parameters in SI units."""

    bandwidth_hz: float
    channels_per_server: int
    tx_power_w: float
    noise_psd: float
    pathloss_exponent: float


@dataclass(frozen=True)
class ExperimentSection:
    """A sweep over one config axis, replicated over seeds."""

    sweep: str
    values: tuple[float, ...]
    schedulers: tuple[str, ...]
    seeds: tuple[int, ...]


@dataclass(frozen=True)
class RunConfig:
    """One simulation setup in SI units."""

    area: tuple[float, float]
    num_servers: int
    num_users: int
    arrival_rate: float          # tasks per user per second
    mean_cycles: float
    capacity_range: tuple[float, float]   # cycles/s
    data_size_range: tuple[float, float]  # bits
    deadline_range: tuple[float, float]   # seconds, relative to arrival
    nearest_servers: int
    horizon: float
    delta: float
    speed: float
    turn_prob: float
    coverage_radius: float
    min_coverage: int
    seed: int
    scheduler: str
    size_key: str
    force_offload: bool
    drop_stale: bool
    trace: bool
    radio: RadioSection
    experiment: ExperimentSection | None = None


def substream(*key: object) -> random.Random:
    """A deterministic RNG derived from a structured key, stable across
    processes and platforms."""
    digest = hashlib.blake2b(repr(key).encode("utf-8"), digest_size=8).digest()
    return random.Random(int.from_bytes(digest, "big"))


def _require_range(value: Any, key: str, *, minimum: float | None = None) -> tuple[float, float]:
    if (
        not isinstance(value, (list, tuple))
        or len(value) != 2
        or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value)
    ):
        raise ConfigError(f"{key}: expected a [low, high] pair", field=key)
    lo, hi = float(value[0]), float(value[1])
    if lo > hi:
        raise ConfigError(f"{key}: low bound exceeds high bound", field=key)
    if minimum is not None and lo < minimum:
        raise ConfigError(f"{key}: values must be >= {minimum}", field=key)
    return lo, hi


def _require_number(value: Any, key: str, *, positive: bool = False, nonnegative: bool = False) -> float:
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise ConfigError(f"{key}: expected a number", field=key)
    number = float(value)
    if positive and number <= 0:
        raise ConfigError(f"{key}: must be positive", field=key)
    if nonnegative and number < 0:
        raise ConfigError(f"{key}: must be nonnegative", field=key)
    return number


def _require_int(value: Any, key: str, *, minimum: int) -> int:
    if not isinstance(value, int) or isinstance(value, bool):
        raise ConfigError(f"{key}: expected an integer", field=key)
    if value < minimum:
        raise ConfigError(f"{key}: must be >= {minimum}", field=key)
    return value


def _require_bool(value: Any, key: str) -> bool:
    if not isinstance(value, bool):
        raise ConfigError(f"{key}: expected a boolean", field=key)
    return value


def _reject_unknown(section: dict, allowed: Sequence[str], where: str) -> None:
    unknown = sorted(set(section) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown config key {where}{unknown[0]!r}", field=unknown[0])


def _parse_experiment(section: dict) -> ExperimentSection:
    _reject_unknown(section, ("sweep", "values", "schedulers", "seeds"), "experiment.")
    sweep = section.get("sweep")
    if sweep not in SWEEPABLE:
        raise ConfigError(f"experiment.sweep: must be one of {SWEEPABLE}", field="sweep")
    raw_values = section.get("values")
    if not isinstance(raw_values, list) or not raw_values:
        raise ConfigError("experiment.values: expected a nonempty list", field="values")
    values = tuple(_require_number(v, "experiment.values", positive=True) for v in raw_values)
    raw_scheds = section.get("schedulers", ["fod"])
    if not isinstance(raw_scheds, list) or not raw_scheds:
        raise ConfigError("experiment.schedulers: expected a nonempty list", field="schedulers")
    for name in raw_scheds:
        if name not in SCHEDULER_NAMES:
            raise ConfigError(f"experiment.schedulers: unknown scheduler {name!r}", field="schedulers")
    raw_seeds = section.get("seeds", [0])
    if not isinstance(raw_seeds, list) or not raw_seeds:
        raise ConfigError("experiment.seeds: expected a nonempty list", field="seeds")
    seeds = tuple(_require_int(s, "experiment.seeds", minimum=0) for s in raw_seeds)
    return ExperimentSection(sweep, values, tuple(raw_scheds), seeds)


def config_from_dict(raw: dict) -> RunConfig:
    """Validate a raw (natural-unit) mapping and convert it to SI."""
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a table")
    _reject_unknown(raw, list(_TOP_DEFAULTS) + ["radio", "experiment"], "")
    merged = dict(_TOP_DEFAULTS, **raw)

    radio_raw = merged.pop("radio", {})
    if not isinstance(radio_raw, dict):
        raise ConfigError("radio: expected a table", field="radio")
    _reject_unknown(radio_raw, list(_RADIO_DEFAULTS), "radio.")
    radio_merged = dict(_RADIO_DEFAULTS, **radio_raw)

    experiment_raw = merged.pop("experiment", None)
    experiment = None
    if experiment_raw is not None:
        if not isinstance(experiment_raw, dict):
            raise ConfigError("experiment: expected a table", field="experiment")
        experiment = _parse_experiment(experiment_raw)

    area = _require_range(merged["area_m"], "area_m", minimum=1.0)
    num_servers = _require_int(merged["num_servers"], "num_servers", minimum=1)
    num_users = _require_int(merged["num_users"], "num_users", minimum=0)
    nearest = _require_int(merged["nearest_servers"], "nearest_servers", minimum=1)
    if nearest > num_servers:
        raise ConfigError("nearest_servers: exceeds num_servers", field="nearest_servers")
    min_coverage = _require_int(merged["min_coverage"], "min_coverage", minimum=1)
    if min_coverage > num_servers:
        raise ConfigError("min_coverage: exceeds num_servers", field="min_coverage")
    capacity_ghz = _require_range(merged["capacity_ghz"], "capacity_ghz", minimum=1e-6)
    data_kb = _require_range(merged["data_size_kb"], "data_size_kb", minimum=0.0)
    deadline = _require_range(merged["deadline_s"], "deadline_s", minimum=1e-9)
    scheduler = merged["scheduler"]
    if scheduler not in SCHEDULER_NAMES:
        raise ConfigError(f"scheduler: unknown scheduler {scheduler!r}", field="scheduler")
    size_key = merged["size_key"]
    if size_key not in ("cycles", "bits"):
        raise ConfigError("size_key: must be 'cycles' or 'bits'", field="size_key")

    radio = RadioSection(
        bandwidth_hz=_require_number(radio_merged["bandwidth_mhz"], "radio.bandwidth_mhz", positive=True) * 1e6,
        channels_per_server=_require_int(radio_merged["channels_per_server"], "radio.channels_per_server", minimum=1),
        tx_power_w=_require_number(radio_merged["tx_power_mw"], "radio.tx_power_mw", positive=True) * 1e-3,
        noise_psd=noise_psd_from_dbm(_require_number(radio_merged["noise_dbm_per_hz"], "radio.noise_dbm_per_hz")),
        pathloss_exponent=_require_number(radio_merged["pathloss_exponent"], "radio.pathloss_exponent", positive=True),
    )

    return RunConfig(
        area=area,
        num_servers=num_servers,
        num_users=num_users,
        arrival_rate=_require_number(merged["arrival_rate_per_s"], "arrival_rate_per_s", positive=True),
        mean_cycles=_require_number(merged["mean_cycles"], "mean_cycles", positive=True),
        capacity_range=(capacity_ghz[0] * 1e9, capacity_ghz[1] * 1e9),
        data_size_range=(data_kb[0] * BITS_PER_KB, data_kb[1] * BITS_PER_KB),
        deadline_range=deadline,
        nearest_servers=nearest,
        horizon=_require_number(merged["horizon_s"], "horizon_s", positive=True),
        delta=_require_number(merged["delta_s"], "delta_s", positive=True),
        speed=_require_number(merged["speed_mps"], "speed_mps", nonnegative=True),
        turn_prob=_require_number(merged["turn_prob"], "turn_prob", nonnegative=True),
        coverage_radius=_require_number(merged["coverage_radius_m"], "coverage_radius_m", positive=True),
        min_coverage=min_coverage,
        seed=_require_int(merged["seed"], "seed", minimum=0),
        scheduler=scheduler,
        size_key=size_key,
        force_offload=_require_bool(merged["force_offload"], "force_offload"),
        drop_stale=_require_bool(merged["drop_stale"], "drop_stale"),
        trace=_require_bool(merged["trace"], "trace"),
        radio=radio,
        experiment=experiment,
    )


def load_config(path: str | Path) -> RunConfig:
    """Read a TOML (default) or JSON config file; an empty file means all
    defaults."""
    path = Path(path)
    data = path.read_bytes()
    if not data.strip():
        return config_from_dict({})
    if path.suffix == ".json":
        try:
            raw = json.loads(data)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
    else:
        try:
            raw = tomllib.loads(data.decode("utf-8"))
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
    return config_from_dict(raw)


def apply_sweep_value(config: RunConfig, sweep: str, value: float) -> RunConfig:
    """Return a copy of ``config`` with one sweepable axis pinned."""
    if sweep == "capacity_ghz":
        return replace(config, capacity_range=(value * 1e9, value * 1e9))
    if sweep == "num_users":
        return replace(config, num_users=int(value))
    if sweep == "nearest_servers":
        if int(value) > config.num_servers:
            raise ConfigError("nearest_servers: exceeds num_servers", field="nearest_servers")
        return replace(config, nearest_servers=int(value))
    if sweep == "arrival_rate_per_s":
        return replace(config, arrival_rate=float(value))
    raise ConfigError(f"unknown sweep axis {sweep!r}", field="sweep")


def _format_toml_value(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, float)):
        return repr(value)
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, list):
        return "[" + ", ".join(_format_toml_value(v) for v in value) + "]"
    raise TypeError(f"cannot format {value!r}")


def dump_default_toml() -> str:
    """The full default configuration as TOML text."""
    lines = [f"{key} = {_format_toml_value(value)}" for key, value in _TOP_DEFAULTS.items()]
    lines.append("")
    lines.append("[radio]")
    lines.extend(f"{key} = {_format_toml_value(value)}" for key, value in _RADIO_DEFAULTS.items())
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class BatchParams:
    """Distribution parameters for synthetic common-arrival batches."""

    mean_cycles: float = 200e6
    deadline_range: tuple[float, float] = (0.5, 5.0)
    data_size_range: tuple[float, float] = (80e3, 40e6)
    arrival_time: float = 0.0

    def __post_init__(self):
        if self.mean_cycles <= 0:
            raise ValueError("mean_cycles must be positive")
        if self.deadline_range[0] <= 0 or self.deadline_range[0] > self.deadline_range[1]:
            raise ValueError("deadline_range must be positive and ordered")
        if self.data_size_range[0] < 0 or self.data_size_range[0] > self.data_size_range[1]:
            raise ValueError("data_size_range must be nonnegative and ordered")


def gen_batch_instance(n: int, seed: int, params: BatchParams = BatchParams()) -> list[Task]:
    """n tasks sharing one arrival instant: exponential work, uniform
    relative deadlines, uniform payloads. Deterministic per (n, seed)."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    rng = substream("batch", seed, n)
    tasks = []
    for seq in range(1, n + 1):
        cycles = rng.expovariate(1.0 / params.mean_cycles)
        deadline = params.arrival_time + rng.uniform(*params.deadline_range)
        size = rng.uniform(*params.data_size_range)
        tasks.append(
            Task(
                id=(0, seq),
                arrival_time=params.arrival_time,
                cpu_cycles=cycles,
                deadline=deadline,
                data_size=size,
                origin_user=0,
            )
        )
    return tasks
