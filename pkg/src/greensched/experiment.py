"""Sweep harness: workloads x algorithms x repetitions, to CSV.

A sweep crosses workload families and load points with a set of policies,
repeating each cell with paired seeds: the workload for (family, point, rep)
is derived from the master seed without the algorithm name, so every policy
faces the identical job list and differences are pure policy. The algorithm
name enters only the placement-RNG seed (the randomized policy's coin).

Outputs are plain CSV, rows keyed and sorted before writing so results do
not depend on execution order, and byte-identical across runs of the same
config.
"""

from __future__ import annotations

import csv
import hashlib
from dataclasses import dataclass, field
from pathlib import Path

from .model import SimConfig
from .offline import (
    NONPREEMPTIVE_LIMITS,
    SolveLimits,
    solve_nonpreemptive_exact,
)
from .pricing import (
    GreenTrace,
    Tariff,
    account,
    load_solar_csv,
    normalized_values,
    random_fit_params,
    synthetic_solar,
)
from .schedulers import KINDS, SchedulerKind, run_online
from .workload import FAMILIES, WorkloadSpec, generate


class ExperimentError(RuntimeError):
    """A sweep cell failed; the message names the cell."""


@dataclass
class ExperimentConfig:
    sim: SimConfig = field(default_factory=SimConfig)
    tariff: Tariff = field(default_factory=Tariff)
    green: str = "synthetic"  # synthetic | zero | solar:<csv path>
    families: tuple[str, ...] = ("UE",)
    utilization: tuple[float, ...] = (0.1, 0.5, 1.0)
    job_counts: tuple[int, ...] = ()  # Real family sweep points
    swf_path: str | None = None
    fixed_p: int = 5
    fixed_q: int = 3
    day_fraction: float = 0.75
    span_days: int = 2
    deadline_factor: int = 4
    algorithms: tuple[str, ...] = ("FF", "BF", "RF")
    repetitions: int = 30
    include_offline: bool = False
    offline_limits: SolveLimits = NONPREEMPTIVE_LIMITS
    output_dir: str | None = None
    master_seed: int = 0

    def __post_init__(self) -> None:
        for f in self.families:
            if f not in FAMILIES:
                raise ValueError(f"unknown family {f!r}")
        for a in self.algorithms:
            if a not in KINDS:
                raise ValueError(f"unknown algorithm {a!r}")
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        if any(f != "Real" for f in self.families) and not self.utilization:
            raise ValueError("utilization sweep must not be empty")
        if "Real" in self.families and not self.job_counts:
            raise ValueError("Real family needs job_counts")


def stable_seed(*parts) -> int:
    """Platform-stable 64-bit seed from the given key parts."""
    text = "|".join(str(p) for p in parts)
    return int.from_bytes(hashlib.blake2b(text.encode(), digest_size=8).digest(), "big")


def resolve_green(cfg: ExperimentConfig) -> GreenTrace:
    if cfg.green == "synthetic":
        return synthetic_solar(cfg.sim)
    if cfg.green == "zero":
        return GreenTrace.zeros(cfg.sim)
    if cfg.green.startswith("solar:"):
        return load_solar_csv(cfg.green.split(":", 1)[1], cfg.sim)
    raise ValueError(f"unknown green source {cfg.green!r}")


def _points(cfg: ExperimentConfig, family: str) -> tuple:
    return cfg.job_counts if family == "Real" else cfg.utilization


def _spec_for(cfg: ExperimentConfig, family: str, point, seed: int) -> WorkloadSpec:
    if family == "Real":
        return WorkloadSpec(
            family="Real",
            job_count=int(point),
            swf_path=cfg.swf_path,
            deadline_factor=cfg.deadline_factor,
            rng_seed=seed,
        )
    return WorkloadSpec(
        family=family,
        target_utilization=float(point),
        fixed_p=cfg.fixed_p,
        fixed_q=cfg.fixed_q,
        day_fraction=cfg.day_fraction,
        span_days=cfg.span_days,
        rng_seed=seed,
    )


def _kind(name: str, cfg: ExperimentConfig) -> SchedulerKind:
    if name in ("RF", "PRF"):
        params = random_fit_params(normalized_values(cfg.tariff, cfg.sim))
        return SchedulerKind(name, rf_params=params)
    return SchedulerKind(name)


def _run_row(cfg, family, point, rep, name, jobs, schedule, report) -> dict:
    total = cfg.sim.machines * cfg.sim.horizon_slots
    placed = sum(len(p.active_slots) * p.nodes for p in schedule.placements)
    return {
        "family": family,
        "point": point,
        "algorithm": name,
        "rep": rep,
        "jobs_offered": len(jobs),
        "jobs_scheduled": len(schedule.placements),
        "scheduled_workload_pct": 100.0 * placed / total,
        "revenue": report.revenue,
        "brown_cost": report.brown_cost,
        "net_profit": report.net_profit,
        "green_used": report.green_total,
        "brown_used": report.brown_total,
    }


_NUMERIC = [
    "jobs_offered",
    "jobs_scheduled",
    "scheduled_workload_pct",
    "revenue",
    "brown_cost",
    "net_profit",
    "green_used",
    "brown_used",
]

RUNS_HEADER = ["family", "point", "algorithm", "rep"] + _NUMERIC
MEANS_HEADER = ["family", "point", "algorithm"] + _NUMERIC
RATIOS_HEADER = ["family", "point", "algorithm", "mean_net_profit", "opt_prime", "ratio"]
PREEMPTION_HEADER = [
    "family",
    "point",
    "algorithm",
    "base_net_profit",
    "preemptive_net_profit",
    "ratio",
]


def run_suite(cfg: ExperimentConfig) -> dict[str, list[dict]]:
    """Execute the sweep; return and (if configured) write the three tables.

    runs: one row per (family, point, algorithm, rep). means: averages over
    reps. ratios: best mean profit at each point (an empirical stand-in for
    the optimum) divided by each policy's mean. With ``include_offline`` the
    exact solver joins as algorithm OPT at desk-scale points.
    """
    green = resolve_green(cfg)
    kinds = {name: _kind(name, cfg) for name in cfg.algorithms}
    runs: list[dict] = []
    for family in cfg.families:
        for point in _points(cfg, family):
            for rep in range(cfg.repetitions):
                wseed = stable_seed(cfg.master_seed, family, point, rep)
                try:
                    jobs = generate(_spec_for(cfg, family, point, wseed), cfg.sim, cfg.tariff)
                except (ValueError, OSError) as exc:
                    raise ExperimentError(
                        f"{family} point {point} rep {rep}: {exc}"
                    ) from exc
                for name in cfg.algorithms:
                    aseed = stable_seed(cfg.master_seed, family, point, rep, name)
                    sched, report, _ = run_online(
                        jobs, kinds[name], green, cfg.tariff, cfg.sim, seed=aseed
                    )
                    runs.append(
                        _run_row(cfg, family, point, rep, name, jobs, sched, report)
                    )
                if cfg.include_offline:
                    try:
                        opt, osched = solve_nonpreemptive_exact(
                            jobs, green, cfg.tariff, cfg.sim, cfg.offline_limits
                        )
                    except ValueError as exc:
                        raise ExperimentError(
                            f"{family} point {point} rep {rep}: {exc}"
                        ) from exc
                    oreport = account(osched, green, cfg.tariff, cfg.sim)
                    runs.append(
                        _run_row(cfg, family, point, rep, "OPT", jobs, osched, oreport)
                    )
    runs.sort(key=_row_key)
    means = _mean_rows(runs)
    ratios = _ratio_rows(means)
    if cfg.output_dir is not None:
        out = Path(cfg.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        _write_csv(out / "runs.csv", RUNS_HEADER, runs)
        _write_csv(out / "means.csv", MEANS_HEADER, means)
        _write_csv(out / "ratios.csv", RATIOS_HEADER, ratios)
    return {"runs": runs, "means": means, "ratios": ratios}


def preemption_comparison(cfg: ExperimentConfig) -> list[dict]:
    """Paired sweep of each policy against its preemptive variant.

    Rows report mean profit with and without preemption and their ratio
    (preemptive over base) per family, point, and base policy.
    """
    bases = [a for a in cfg.algorithms if not a.startswith("P")]
    names = list(bases) + ["P" + a for a in bases]
    kinds = {name: _kind(name, cfg) for name in names}
    green = resolve_green(cfg)
    sums: dict[tuple, dict[str, float]] = {}
    for family in cfg.families:
        for point in _points(cfg, family):
            for rep in range(cfg.repetitions):
                wseed = stable_seed(cfg.master_seed, family, point, rep)
                jobs = generate(_spec_for(cfg, family, point, wseed), cfg.sim, cfg.tariff)
                for name in names:
                    aseed = stable_seed(cfg.master_seed, family, point, rep, name)
                    _, report, _ = run_online(
                        jobs, kinds[name], green, cfg.tariff, cfg.sim, seed=aseed
                    )
                    cell = sums.setdefault((family, point), {})
                    cell[name] = cell.get(name, 0.0) + report.net_profit
    rows = []
    for (family, point), cell in sums.items():
        for base in bases:
            base_mean = cell[base] / cfg.repetitions
            pre_mean = cell["P" + base] / cfg.repetitions
            rows.append(
                {
                    "family": family,
                    "point": point,
                    "algorithm": base,
                    "base_net_profit": base_mean,
                    "preemptive_net_profit": pre_mean,
                    "ratio": pre_mean / base_mean if base_mean > 0 else float("inf"),
                }
            )
    rows.sort(key=_row_key)
    if cfg.output_dir is not None:
        out = Path(cfg.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        _write_csv(out / "preemption.csv", PREEMPTION_HEADER, rows)
    return rows


def _row_key(row: dict):
    return (
        row["family"],
        float(row["point"]),
        row["algorithm"],
        row.get("rep", 0),
    )


def _mean_rows(runs: list[dict]) -> list[dict]:
    groups: dict[tuple, list[dict]] = {}
    for row in runs:
        groups.setdefault((row["family"], row["point"], row["algorithm"]), []).append(row)
    means = []
    for (family, point, name), rows in groups.items():
        out = {"family": family, "point": point, "algorithm": name}
        for col in _NUMERIC:
            out[col] = sum(r[col] for r in rows) / len(rows)
        means.append(out)
    means.sort(key=_row_key)
    return means


def _ratio_rows(means: list[dict]) -> list[dict]:
    by_point: dict[tuple, list[dict]] = {}
    for row in means:
        by_point.setdefault((row["family"], row["point"]), []).append(row)
    out = []
    for (family, point), rows in by_point.items():
        opt_prime = max(r["net_profit"] for r in rows)
        for r in rows:
            profit = r["net_profit"]
            out.append(
                {
                    "family": family,
                    "point": point,
                    "algorithm": r["algorithm"],
                    "mean_net_profit": profit,
                    "opt_prime": opt_prime,
                    "ratio": opt_prime / profit if profit > 0 else float("inf"),
                }
            )
    out.sort(key=_row_key)
    return out


def _cell(value) -> str:
    if isinstance(value, float):
        return f"{value:.10g}"
    return str(value)


def _write_csv(path: Path, header: list[str], rows: list[dict]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(row[col]) for col in header])


# ---------------------------------------------------------------------------
# Config file parsing: flat ``key = value`` lines, '#' comments.

_LIST_KEYS = {"families", "algorithms"}


def _parse_bool(text: str) -> bool:
    low = text.lower()
    if low in ("true", "yes", "1"):
        return True
    if low in ("false", "no", "0"):
        return False
    raise ValueError(f"expected true/false, got {text!r}")


def load_config(path: str | Path) -> ExperimentConfig:
    """Parse the documented key = value experiment format.

    Unknown keys are an error (typos should not silently change a sweep).
    Lists are comma separated. See the project README for the key table.
    """
    raw: dict[str, str] = {}
    with open(path) as fh:
        for lineno, rawline in enumerate(fh, start=1):
            line = rawline.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            key, _, value = line.partition("=")
            raw[key.strip()] = value.strip()

    def pop(key: str, default=None) -> str | None:
        return raw.pop(key) if key in raw else default

    sim = SimConfig(
        machines=int(pop("machines", "16")),
        horizon_slots=int(pop("horizon_slots", "480")),
        slot_minutes=int(pop("slot_minutes", "15")),
        node_power_watts=float(pop("node_power_watts", "140")),
        forecast_slots=int(pop("forecast_slots", "192")),
        rng_seed=int(pop("master_seed", "0")),
    )
    tariff = Tariff(
        onpeak_price=float(pop("onpeak_price", "0.13")),
        offpeak_price=float(pop("offpeak_price", "0.08")),
        onpeak_start_slot=int(pop("onpeak_start_slot", "36")),
        onpeak_end_slot=int(pop("onpeak_end_slot", "91")),
        charge_rate=float(pop("charge_rate", "0.022")),
    )
    limits_text = pop("offline_limits")
    limits = parse_limits(limits_text, NONPREEMPTIVE_LIMITS) if limits_text else NONPREEMPTIVE_LIMITS
    cfg = ExperimentConfig(
        sim=sim,
        tariff=tariff,
        green=pop("green", "synthetic"),
        families=tuple(s.strip() for s in pop("families", "UE").split(",") if s.strip()),
        utilization=tuple(
            float(s) for s in pop("utilization", "0.1,0.5,1").split(",") if s.strip()
        ),
        job_counts=tuple(int(s) for s in pop("job_counts", "").split(",") if s.strip()),
        swf_path=pop("swf_path"),
        fixed_p=int(pop("fixed_p", "5")),
        fixed_q=int(pop("fixed_q", "3")),
        day_fraction=float(pop("day_fraction", "0.75")),
        span_days=int(pop("span_days", "2")),
        deadline_factor=int(pop("deadline_factor", "4")),
        algorithms=tuple(
            s.strip() for s in pop("algorithms", "FF,BF,RF").split(",") if s.strip()
        ),
        repetitions=int(pop("repetitions", "30")),
        include_offline=_parse_bool(pop("include_offline", "false")),
        offline_limits=limits,
        output_dir=pop("output_dir"),
        master_seed=sim.rng_seed,
    )
    if raw:
        raise ValueError(f"{path}: unknown keys {sorted(raw)}")
    return cfg


def parse_limits(text: str, defaults: SolveLimits) -> SolveLimits:
    """Parse 'jobs=12,slots=48,machines=16' (any subset) onto defaults."""
    values = {
        "jobs": defaults.max_jobs,
        "slots": defaults.max_slots,
        "machines": defaults.max_machines,
    }
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        key, _, val = part.partition("=")
        key = key.strip()
        if key not in values or not val.strip().isdigit():
            raise ValueError(f"bad limits entry {part!r}")
        values[key] = int(val)
    return SolveLimits(values["jobs"], values["slots"], values["machines"])
