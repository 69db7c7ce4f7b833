"""Deadline-aware task offloading for edge servers.

Batch schedulers that maximize on-time tasks on one server, a linear-time
admission test that predicts the optimizer's verdict for a single new
arrival, brute-force oracles for cross-checking, a radio link model, and
a deterministic multi-server offloading simulator.
"""

from .admission import AdmissionVerdict, fod_admit
from .errors import (
    ConfigError,
    DegenerateGeometryError,
    EdgeSchedError,
    InstanceTooLargeError,
    InvalidCapacityError,
    NoCoverageError,
    PreconditionError,
    UnreachableServerError,
)
from .model import (
    OutageVerdict,
    Schedule,
    Task,
    TaskId,
    completion_times,
    is_feasible_order,
    outage_check,
    read_tasks_csv,
    read_tasks_json,
    write_tasks_csv,
    write_tasks_json,
)
from .oracle import OracleResult, oracle_max_served, oracle_max_served_permutations
from .phy import (
    ChannelDraw,
    RadioConfig,
    UserMotionState,
    achievable_rate,
    channel_gain,
    mobility_step,
    sample_fading,
    transmission_delay,
)
from .sched_baselines import DispatchPolicy, dedas_insert, moore_hodgson, next_task
from .sched_core import (
    build_cycle_order,
    build_deadline_order,
    cycle_key,
    deadline_key,
    schedule_optimal,
    schedule_optimal_fast,
)
from .sim import (
    OffloadDecision,
    OutageBreakdown,
    RunMetrics,
    RunResult,
    ServerSnapshot,
    ServerState,
    run,
    select_server,
    server_on_arrival,
    service_ratio,
)
from .workload_config import (
    BatchParams,
    RunConfig,
    config_from_dict,
    gen_batch_instance,
    load_config,
    substream,
)

__version__ = "0.1.0"

__all__ = [
    "AdmissionVerdict",
    "BatchParams",
    "ChannelDraw",
    "ConfigError",
    "DegenerateGeometryError",
    "DispatchPolicy",
    "EdgeSchedError",
    "InstanceTooLargeError",
    "InvalidCapacityError",
    "NoCoverageError",
    "OffloadDecision",
    "OracleResult",
    "OutageBreakdown",
    "OutageVerdict",
    "PreconditionError",
    "RadioConfig",
    "RunConfig",
    "RunMetrics",
    "RunResult",
    "Schedule",
    "ServerSnapshot",
    "ServerState",
    "Task",
    "TaskId",
    "UnreachableServerError",
    "UserMotionState",
    "achievable_rate",
    "build_cycle_order",
    "build_deadline_order",
    "channel_gain",
    "completion_times",
    "config_from_dict",
    "cycle_key",
    "deadline_key",
    "dedas_insert",
    "fod_admit",
    "gen_batch_instance",
    "is_feasible_order",
    "load_config",
    "mobility_step",
    "moore_hodgson",
    "next_task",
    "oracle_max_served",
    "oracle_max_served_permutations",
    "outage_check",
    "read_tasks_csv",
    "read_tasks_json",
    "run",
    "sample_fading",
    "schedule_optimal",
    "schedule_optimal_fast",
    "select_server",
    "server_on_arrival",
    "service_ratio",
    "substream",
    "transmission_delay",
    "write_tasks_csv",
    "write_tasks_json",
]
