"""Executable worst-case instances for the online policies.

Each builder returns a tiny two-slot instance on which a named policy earns
its provable floor, together with the closed-form profit ratio the
construction forces. Profits quote in normalized units (profit divided by
one full-cluster slot of revenue); the instances carry the dollar value of
one normalized unit so measured runs compare exactly.

First-fit is trapped by what it ignores: a later slot that is greener or
cheaper. Best-fit is trapped by what it chases: the cheap slot it grabs is
exactly the one a later job needed. The randomized policy mixes the two and
caps the damage on every such dilemma; its four suite instances realize the
worst cases for both arrival periods.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import Job, SimConfig
from .offline import solve_nonpreemptive_exact
from .pricing import (
    GreenTrace,
    NormalizedValues,
    Tariff,
    normalized_values,
    random_fit_params,
)
from .schedulers import SchedulerKind, run_online

FF_VARIANTS = ("green_next", "offpeak_next")
BF_VARIANTS = ("on_to_off", "off_to_on")


@dataclass(frozen=True)
class AdversarialInstance:
    """A runnable construction plus the profits it is engineered to force."""

    name: str
    jobs: tuple[Job, ...]
    green: GreenTrace
    tariff: Tariff
    config: SimConfig
    target: SchedulerKind
    expected_opt: float  # offline optimum, normalized units
    expected_alg: float  # target policy's (expected) profit, normalized units
    formula_ratio: float  # expected_opt / expected_alg in closed form
    unit_value: float  # dollars per normalized unit


@dataclass(frozen=True)
class RatioMeasurement:
    """Outcome of running a policy against its construction."""

    ratio: float
    stderr: float
    opt_profit: float
    mean_alg_profit: float
    trials: int

    @property
    def infinite(self) -> bool:
        return math.isinf(self.ratio)


def _instance_frame(
    nv: NormalizedValues, peak_pattern: tuple[bool, bool], machines: int
) -> tuple[Tariff, SimConfig]:
    """Two-slot setting whose prices reproduce the given value ladder.

    Prices are reconstructed from the normalized values so the tariff and nv
    cannot drift apart: price = (1 - v) * slot revenue / node-slot energy.
    """
    config = SimConfig(machines=machines, horizon_slots=2, forecast_slots=192)
    per_slot_revenue = 0.022 * config.slot_hours
    kwh = config.node_slot_kwh
    onpeak_price = (1.0 - nv.v_on) * per_slot_revenue / kwh
    offpeak_price = (1.0 - nv.v_off) * per_slot_revenue / kwh
    tariff = Tariff(
        onpeak_price=onpeak_price,
        offpeak_price=offpeak_price,
        charge_rate=0.022,
        peak_override=peak_pattern,
    )
    return tariff, config


def _full_job(jid: int, release: int, machines: int) -> Job:
    return Job(id=jid, release=release, deadline=1, proc_time=1, nodes=machines)


def ff_lower_bound_instance(
    variant: str, nv: NormalizedValues, machines: int = 16
) -> AdversarialInstance:
    """Make first-fit pay for its haste.

    ``green_next``: both slots on-peak, all the green arrives in slot 1; one
    cluster-wide job is released at 0 with a slot of slack. First-fit burns
    brown now (v_on) where waiting was free (v_g). ``offpeak_next``: no
    green, slot 0 on-peak, slot 1 off-peak; same job, same haste, v_on
    against v_off.
    """
    if variant not in FF_VARIANTS:
        raise ValueError(f"variant must be one of {FF_VARIANTS}")
    if variant == "green_next":
        tariff, config = _instance_frame(nv, (True, True), machines)
        green = GreenTrace(np.array([0, machines]))
        expected_opt, expected_alg = nv.v_g, nv.v_on
    else:
        tariff, config = _instance_frame(nv, (True, False), machines)
        green = GreenTrace(np.array([0, 0]))
        expected_opt, expected_alg = nv.v_off, nv.v_on
    unit = tariff.charge_rate * config.slot_hours * machines
    return AdversarialInstance(
        name=f"ff_{variant}",
        jobs=(_full_job(0, 0, machines),),
        green=green,
        tariff=tariff,
        config=config,
        target=SchedulerKind("FF"),
        expected_opt=expected_opt,
        expected_alg=expected_alg,
        formula_ratio=expected_opt / expected_alg,
        unit_value=unit,
    )


def bf_lower_bound_instance(
    variant: str, nv: NormalizedValues, machines: int = 16
) -> AdversarialInstance:
    """Make best-fit pay for its greed.

    Two cluster-wide jobs: one released at 0 with slack, one released at 1
    with none. Best-fit parks the first job on the better slot 1 (cheaper
    brown in ``on_to_off``, free green in ``off_to_on``), so the second job
    finds the cluster full and dies at its deadline. Waiting algorithms keep
    both.
    """
    if variant not in BF_VARIANTS:
        raise ValueError(f"variant must be one of {BF_VARIANTS}")
    if variant == "on_to_off":
        tariff, config = _instance_frame(nv, (True, False), machines)
        green = GreenTrace(np.array([0, 0]))
        expected_opt = nv.v_on + nv.v_off
        expected_alg = nv.v_off
    else:
        tariff, config = _instance_frame(nv, (False, True), machines)
        green = GreenTrace(np.array([0, machines]))
        expected_opt = nv.v_off + nv.v_g
        expected_alg = nv.v_g
    unit = tariff.charge_rate * config.slot_hours * machines
    return AdversarialInstance(
        name=f"bf_{variant}",
        jobs=(_full_job(0, 0, machines), _full_job(1, 1, machines)),
        green=green,
        tariff=tariff,
        config=config,
        target=SchedulerKind("BF"),
        expected_opt=expected_opt,
        expected_alg=expected_alg,
        formula_ratio=expected_opt / expected_alg,
        unit_value=unit,
    )


def rf_worst_case_suite(
    nv: NormalizedValues, machines: int = 16
) -> list[AdversarialInstance]:
    """The four dilemmas that pin the randomized policy's guarantee.

    For each arrival period (on-peak with off-peak next, off-peak with green
    next) there are two cases: a lone job, where hasty placement loses, and
    a job pair, where patient placement loses. With the tuned coin both
    cases of a period share one expected ratio (1 + k - k^2 for the period's
    value ratio k), which is the policy's worst case.
    """
    params = random_fit_params(nv)
    p_on, p_off = params.p_on_to_off, params.p_off_to_on
    out: list[AdversarialInstance] = []

    def build(name, peak, green_units, jobs, opt, alg, ratio):
        tariff, config = _instance_frame(nv, peak, machines)
        unit = tariff.charge_rate * config.slot_hours * machines
        out.append(
            AdversarialInstance(
                name=name,
                jobs=jobs,
                green=GreenTrace(np.array(green_units)),
                tariff=tariff,
                config=config,
                target=SchedulerKind("RF", rf_params=params),
                expected_opt=opt,
                expected_alg=alg,
                formula_ratio=ratio,
                unit_value=unit,
            )
        )

    one = (_full_job(0, 0, machines),)
    two = (_full_job(0, 0, machines), _full_job(1, 1, machines))
    build(
        "rf_on_to_off_single", (True, False), [0, 0], one,
        nv.v_off, p_on * nv.v_on + (1 - p_on) * nv.v_off, params.ratio_on,
    )
    build(
        "rf_on_to_off_pair", (True, False), [0, 0], two,
        nv.v_on + nv.v_off, p_on * nv.v_on + nv.v_off, params.ratio_on,
    )
    build(
        "rf_off_to_on_single", (False, True), [0, machines], one,
        nv.v_g, p_off * nv.v_off + (1 - p_off) * nv.v_g, params.ratio_off,
    )
    build(
        "rf_off_to_on_pair", (False, True), [0, machines], two,
        nv.v_off + nv.v_g, p_off * nv.v_off + nv.v_g, params.ratio_off,
    )
    return out


def measure_ratio(
    instance: AdversarialInstance,
    kind: SchedulerKind | None = None,
    trials: int = 1,
    base_seed: int = 0,
) -> RatioMeasurement:
    """Run a policy on the construction and report OPT over its mean profit.

    The optimum comes from the exact offline solver. Deterministic policies
    need one trial; randomized ones get fresh seeds base_seed + i. A policy
    that earns nothing on every trial reports an infinite ratio (flagged via
    ``infinite``); the standard error follows the delta method.
    """
    kind = instance.target if kind is None else kind
    opt, _ = solve_nonpreemptive_exact(
        list(instance.jobs), instance.green, instance.tariff, instance.config
    )
    profits = np.empty(trials)
    for i in range(trials):
        _, report, _ = run_online(
            list(instance.jobs),
            kind,
            instance.green,
            instance.tariff,
            instance.config,
            seed=base_seed + i,
        )
        profits[i] = report.net_profit
    mean = float(profits.mean())
    se_mean = float(profits.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    if mean <= 0:
        return RatioMeasurement(math.inf, math.nan, opt, mean, trials)
    return RatioMeasurement(
        ratio=opt / mean,
        stderr=opt * se_mean / (mean * mean),
        opt_profit=opt,
        mean_alg_profit=mean,
        trials=trials,
    )


def standard_suite(machines: int = 16) -> list[AdversarialInstance]:
    """All constructions under the stock tariff's value ladder."""
    nv = normalized_values(Tariff(), SimConfig(machines=machines))
    out = [ff_lower_bound_instance(v, nv, machines) for v in FF_VARIANTS]
    out += [bf_lower_bound_instance(v, nv, machines) for v in BF_VARIANTS]
    out += rf_worst_case_suite(nv, machines)
    return out
