"""Profit-aware job scheduling for data centers with on-site renewables.

The package splits along the problem's seams: ``model`` holds the grid of
machines and slots, ``pricing`` turns schedules into money, ``schedulers``
are the online policies, ``offline`` the exact solver and model export,
``adversary`` the worst-case constructions, ``workload`` the instance
generators, and ``experiment`` the sweep harness.
"""

from .adversary import (
    AdversarialInstance,
    RatioMeasurement,
    bf_lower_bound_instance,
    ff_lower_bound_instance,
    measure_ratio,
    rf_worst_case_suite,
    standard_suite,
)
from .experiment import (
    ExperimentConfig,
    ExperimentError,
    load_config,
    preemption_comparison,
    run_suite,
    stable_seed,
)
from .model import (
    CapacityError,
    Job,
    Placement,
    Schedule,
    SimConfig,
    commit,
    feasible_windows,
    nonpreemptive_starts,
    preemptive_slots,
)
from .offline import (
    InstanceLimitError,
    NONPREEMPTIVE_LIMITS,
    PREEMPTIVE_LIMITS,
    SolveLimits,
    emit_lp,
    node_assignment,
    solve_nonpreemptive_exact,
    solve_preemptive_exact,
)
from .pricing import (
    GreenTrace,
    NormalizedValues,
    ProfitReport,
    RandomFitParams,
    Tariff,
    account,
    brown_cost_vector,
    brown_unit_cost,
    is_on_peak,
    job_revenue,
    load_solar_csv,
    normalized_values,
    random_fit_params,
    synthetic_solar,
)
from .schedulers import (
    LogEntry,
    OnlineState,
    SchedulerKind,
    bf_place,
    ff_place,
    rf_place,
    run_online,
    write_log_csv,
)
from .workload import (
    WorkloadSpec,
    generate,
    ingest_swf,
    read_jobs,
    write_jobs,
)

__version__ = "0.1.0"

__all__ = [
    "AdversarialInstance",
    "CapacityError",
    "ExperimentConfig",
    "ExperimentError",
    "GreenTrace",
    "InstanceLimitError",
    "Job",
    "LogEntry",
    "NONPREEMPTIVE_LIMITS",
    "NormalizedValues",
    "OnlineState",
    "PREEMPTIVE_LIMITS",
    "Placement",
    "ProfitReport",
    "RandomFitParams",
    "RatioMeasurement",
    "Schedule",
    "SchedulerKind",
    "SimConfig",
    "SolveLimits",
    "Tariff",
    "WorkloadSpec",
    "account",
    "bf_lower_bound_instance",
    "bf_place",
    "brown_cost_vector",
    "brown_unit_cost",
    "commit",
    "emit_lp",
    "feasible_windows",
    "ff_lower_bound_instance",
    "ff_place",
    "generate",
    "ingest_swf",
    "is_on_peak",
    "job_revenue",
    "load_config",
    "load_solar_csv",
    "measure_ratio",
    "node_assignment",
    "nonpreemptive_starts",
    "normalized_values",
    "preemption_comparison",
    "preemptive_slots",
    "random_fit_params",
    "read_jobs",
    "rf_place",
    "rf_worst_case_suite",
    "run_online",
    "run_suite",
    "solve_nonpreemptive_exact",
    "solve_preemptive_exact",
    "stable_seed",
    "standard_suite",
    "synthetic_solar",
    "write_jobs",
    "write_log_csv",
]
