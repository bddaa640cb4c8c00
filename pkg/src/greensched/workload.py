"""Workload generation and ingestion.

Synthetic families share one knob, target utilization u: the expected total
demand sum(p_j * q_j) is tuned to u * M * T node-slots. Families:

  UU         uniform arrivals, p ~ U[1,9], q ~ U[1,5], loose uniform deadlines
  UE         uniform arrivals, equal sizes (fixed p and q), loose deadlines
  PU / PE    Poisson arrivals with UU / UE sizes
  Staggered  periodic day-heavy arrivals, deadline a fixed span after release
  Real       sampled from a batch trace file (see ingest_swf)

Generation is deterministic given the spec's seed. Generators never emit a
job whose window leaves the horizon.

Job files are plain text, one job per line: ``id release deadline proc_time
nodes``, whitespace separated, '#' comments. Trace files follow the classic
batch-log column order (job id, submit seconds, run seconds, requested
processors); deadlines are synthesized as release + deadline_factor * p.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .model import Job, SimConfig
from .pricing import Tariff, onpeak_vector

FAMILIES = ("UU", "UE", "PU", "PE", "Staggered", "Real")


@dataclass(frozen=True)
class WorkloadSpec:
    """Everything needed to synthesize (or sample) one job list."""

    family: str
    target_utilization: float | None = None
    fixed_p: int = 5
    fixed_q: int = 3
    job_count: int | None = None  # Real family: how many jobs to sample
    swf_path: str | None = None
    day_fraction: float = 0.75  # Staggered: share of arrivals on-peak
    span_days: int = 2  # Staggered: deadline span after release
    deadline_factor: int = 4  # Real: deadline = release + factor * p
    rng_seed: int = 0

    def __post_init__(self) -> None:
        if self.family not in FAMILIES:
            raise ValueError(f"unknown workload family {self.family!r}")
        if self.family == "Real":
            if self.job_count is None or self.job_count < 1:
                raise ValueError("Real workloads need job_count >= 1")
            if self.swf_path is None:
                raise ValueError("Real workloads need swf_path")
        else:
            u = self.target_utilization
            if u is None or not 0 < u <= 1.5:
                raise ValueError("target_utilization must lie in (0, 1.5]")
        if self.fixed_p < 1 or self.fixed_q < 1:
            raise ValueError("fixed sizes must be >= 1")
        if not 0 <= self.day_fraction <= 1:
            raise ValueError("day_fraction must lie in [0, 1]")
        if self.span_days < 1 or self.deadline_factor < 1:
            raise ValueError("span_days and deadline_factor must be >= 1")


def _mean_q(config: SimConfig) -> float:
    qmax = min(5, config.machines)
    return (1 + qmax) / 2


def _job_budget(spec: WorkloadSpec, config: SimConfig, mean_pq: float) -> int:
    u = spec.target_utilization
    return max(1, round(u * config.machines * config.horizon_slots / mean_pq))


def _draw_uniform_sizes(rng: np.random.Generator, config: SimConfig) -> tuple[int, int]:
    p = int(rng.integers(1, 10))
    q = int(rng.integers(1, min(5, config.machines) + 1))
    return p, q


def generate(
    spec: WorkloadSpec, config: SimConfig, tariff: Tariff | None = None
) -> list[Job]:
    """Deterministically build the job list described by the spec.

    Jobs come back sorted by (release, deadline) with ids 0..n-1 in that
    order (Real keeps the trace's own ids). Specs that cannot fit the
    cluster, such as a fixed node count above M, are rejected.
    """
    if spec.family == "Real":
        return ingest_swf(
            spec.swf_path,
            config,
            count=spec.job_count,
            rng_seed=spec.rng_seed,
            deadline_factor=spec.deadline_factor,
        )
    rng = np.random.default_rng(spec.rng_seed)
    T = config.horizon_slots
    raw: list[tuple[int, int, int, int]] = []  # (release, deadline, p, q)

    if spec.family in ("UE", "PE") and spec.fixed_q > config.machines:
        raise ValueError(
            f"fixed node requirement {spec.fixed_q} exceeds {config.machines} machines"
        )
    if spec.family in ("UE", "PE") and spec.fixed_p > T:
        raise ValueError("fixed proc time exceeds the horizon")

    if spec.family == "UU":
        n = _job_budget(spec, config, 5.0 * _mean_q(config))
        for _ in range(n):
            p, q = _draw_uniform_sizes(rng, config)
            r = int(rng.integers(0, T - p + 1))
            d = int(rng.integers(r + p - 1, T))
            raw.append((r, d, p, q))
    elif spec.family == "UE":
        n = _job_budget(spec, config, spec.fixed_p * spec.fixed_q)
        p, q = spec.fixed_p, spec.fixed_q
        for _ in range(n):
            r = int(rng.integers(0, T - p + 1))
            d = int(rng.integers(r + p - 1, T))
            raw.append((r, d, p, q))
    elif spec.family in ("PU", "PE"):
        if spec.family == "PE":
            mean_pq = float(spec.fixed_p * spec.fixed_q)
        else:
            mean_pq = 5.0 * _mean_q(config)
        lam = spec.target_utilization * config.machines / mean_pq  # jobs per slot
        counts = rng.poisson(lam, size=T)
        for t in range(T):
            for _ in range(int(counts[t])):
                if spec.family == "PE":
                    p, q = spec.fixed_p, spec.fixed_q
                    if t > T - p:
                        continue  # too late to finish inside the horizon
                else:
                    p, q = _draw_uniform_sizes(rng, config)
                    p = min(p, T - t)
                d = int(rng.integers(t + p - 1, T))
                raw.append((t, d, p, q))
    elif spec.family == "Staggered":
        n = _job_budget(spec, config, 5.0 * _mean_q(config))
        peak = onpeak_vector(tariff or Tariff(), config)
        span = spec.span_days * config.slots_per_day
        on_slots = np.flatnonzero(peak)
        off_slots = np.flatnonzero(~peak)
        for _ in range(n):
            p, q = _draw_uniform_sizes(rng, config)
            pool = on_slots if rng.random() < spec.day_fraction else off_slots
            pool = pool[pool <= T - p]
            if pool.size == 0:
                pool = np.arange(0, T - p + 1)
            r = int(pool[rng.integers(0, pool.size)])
            d = min(r + span, T - 1)
            raw.append((r, d, p, q))

    raw.sort(key=lambda row: (row[0], row[1]))
    return [
        Job(id=i, release=r, deadline=d, proc_time=p, nodes=q)
        for i, (r, d, p, q) in enumerate(raw)
    ]


def ingest_swf(
    path: str | Path,
    config: SimConfig,
    count: int | None = None,
    rng_seed: int = 0,
    deadline_factor: int = 4,
) -> list[Job]:
    """Map a batch trace onto the slot grid and sample jobs from it.

    Columns (whitespace or comma separated, '#'/';' comments): job id,
    submit seconds, run seconds, requested processors; extra columns are
    ignored. Submit times are rebased to the earliest one. Releases floor to
    slots, run times round up (minimum one slot), node requests clamp to M
    with a warning, and the deadline is release + deadline_factor * p capped
    at the horizon. Jobs that cannot fit the horizon are skipped with a
    warning. ``count`` jobs are then sampled without replacement using
    ``rng_seed``.
    """
    rows: list[tuple[int, float, float, int]] = []
    with open(path) as fh:
        for lineno, rawline in enumerate(fh, start=1):
            line = rawline.strip()
            if not line or line.startswith("#") or line.startswith(";"):
                continue
            parts = line.replace(",", " ").split()
            if len(parts) < 4:
                raise ValueError(
                    f"{path}:{lineno}: expected at least 4 fields, got {len(parts)}"
                )
            try:
                jid = int(float(parts[0]))
                submit = float(parts[1])
                run = float(parts[2])
                procs = int(float(parts[3]))
            except ValueError:
                raise ValueError(f"{path}:{lineno}: cannot parse '{line}'") from None
            rows.append((jid, submit, run, procs))
    if not rows:
        raise ValueError(f"{path}: no jobs found")

    slot_seconds = config.slot_minutes * 60
    base = min(r[1] for r in rows)
    T = config.horizon_slots
    jobs: list[Job] = []
    for jid, submit, run, procs in rows:
        release = int((submit - base) // slot_seconds)
        p = max(1, math.ceil(run / slot_seconds))
        q = max(1, procs)
        if q > config.machines:
            warnings.warn(
                f"job {jid}: requested {q} nodes, clamped to {config.machines}",
                stacklevel=2,
            )
            q = config.machines
        deadline = min(release + deadline_factor * p, T - 1)
        if release >= T or release + p - 1 > deadline:
            warnings.warn(
                f"job {jid}: window does not fit the {T}-slot horizon, skipped",
                stacklevel=2,
            )
            continue
        jobs.append(Job(id=jid, release=release, deadline=deadline, proc_time=p, nodes=q))

    if not jobs:
        raise ValueError(f"{path}: selection is empty, nothing fits the horizon")
    if len({j.id for j in jobs}) != len(jobs):
        raise ValueError(f"{path}: duplicate job ids")
    if count is not None:
        if count < 1:
            raise ValueError("count must be >= 1")
        if count > len(jobs):
            raise ValueError(
                f"{path}: asked for {count} jobs, only {len(jobs)} usable"
            )
        rng = np.random.default_rng(rng_seed)
        picked = rng.choice(len(jobs), size=count, replace=False)
        jobs = [jobs[i] for i in sorted(picked)]
    return sorted(jobs, key=lambda j: (j.release, j.deadline, j.id))


def write_jobs(jobs: list[Job], path: str | Path) -> None:
    """Emit the plain-text job format this package also reads."""
    with open(path, "w") as fh:
        fh.write("# id release deadline proc_time nodes\n")
        for j in jobs:
            fh.write(f"{j.id} {j.release} {j.deadline} {j.proc_time} {j.nodes}\n")


def read_jobs(path: str | Path, config: SimConfig) -> list[Job]:
    """Read a job file, skipping (with a warning) jobs that cannot run.

    A job is unusable when its window cannot hold its processing time, its
    deadline leaves the horizon, or it wants more nodes than the cluster
    has. Malformed lines raise with the line number; duplicate ids raise.
    """
    jobs: list[Job] = []
    with open(path) as fh:
        for lineno, rawline in enumerate(fh, start=1):
            line = rawline.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 5:
                raise ValueError(f"{path}:{lineno}: expected 5 fields, got {len(parts)}")
            try:
                jid, release, deadline, p, q = (int(x) for x in parts)
            except ValueError:
                raise ValueError(f"{path}:{lineno}: cannot parse '{line}'") from None
            if deadline >= config.horizon_slots:
                warnings.warn(
                    f"{path}:{lineno}: job {jid} deadline outside horizon, skipped",
                    stacklevel=2,
                )
                continue
            if q > config.machines:
                warnings.warn(
                    f"{path}:{lineno}: job {jid} wants {q} nodes on a "
                    f"{config.machines}-node cluster, skipped",
                    stacklevel=2,
                )
                continue
            try:
                job = Job(id=jid, release=release, deadline=deadline, proc_time=p, nodes=q)
            except ValueError as exc:
                warnings.warn(f"{path}:{lineno}: {exc}, skipped", stacklevel=2)
                continue
            jobs.append(job)
    if len({j.id for j in jobs}) != len(jobs):
        raise ValueError(f"{path}: duplicate job ids")
    return jobs
