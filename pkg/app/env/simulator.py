"""Deterministic analytic cost model standing in for hardware."""

import math
from typing import Tuple

from app.env.constants import (
    BASELINE_IF,
    BASELINE_VF,
    SIM_BASE_COMPILE_SECONDS,
    SIM_IF_DEFAULT,
    SIM_IF_PENALTY,
    SIM_IF_REDUCTION,
    SIM_MAX_VF,
    SIM_OVERVECTORIZE_PENALTY,
    SIM_PREDICATE_FACTOR,
    SIM_SECONDS_PER_OP,
    SIM_VECTOR_BITS,
)
from app.env.views import SimLoopFeatures


def _floor_power_of_two(value: float) -> int:
    return 1 << int(math.floor(math.log2(value)))


def optimal_factors(f: SimLoopFeatures) -> Tuple[int, int]:
    """(VF*, IF*) of the cost model."""
    lanes = SIM_VECTOR_BITS / f.elem_bits
    if f.stride != 1:
        lanes /= f.stride
    vf_star = _floor_power_of_two(min(max(lanes, 1.0), float(SIM_MAX_VF)))
    if_star = SIM_IF_REDUCTION if f.has_reduction else SIM_IF_DEFAULT
    return vf_star, if_star


def sim_cost(f: SimLoopFeatures, vf: int, if_: int) -> float:
    """Simulated execution time in seconds of the loop under (vf, if_)."""
    vf_star, if_star = optimal_factors(f)
    work = f.trip_count * f.ops_per_iter
    vf_eff = min(vf, vf_star)
    ops = work / vf_eff * (1.0 + SIM_IF_PENALTY * abs(math.log2(if_) - math.log2(if_star)))
    if f.has_predicate:
        ops *= SIM_PREDICATE_FACTOR
    if vf > vf_star:
        ops += SIM_OVERVECTORIZE_PENALTY * work * math.log2(vf / vf_star)
    return ops * SIM_SECONDS_PER_OP


def sim_baseline_cost(f: SimLoopFeatures) -> float:
    """The compiler's own choice, modelled as a fixed (VF, IF) cell."""
    return sim_cost(f, BASELINE_VF, BASELINE_IF)


def sim_compile_time(f: SimLoopFeatures, vf: int, if_: int) -> float:
    """Compile time grows with the unroll volume beyond the optimum."""
    vf_star, if_star = optimal_factors(f)
    return SIM_BASE_COMPILE_SECONDS * max(1.0, (vf * if_) / (vf_star * if_star))


def sim_baseline_compile_time(f: SimLoopFeatures) -> float:
    return sim_compile_time(f, BASELINE_VF, BASELINE_IF)
