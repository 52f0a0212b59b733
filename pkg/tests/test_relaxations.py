import numpy as np
import pytest
from hypothesis import given, settings

from coflow_hpn.lp_core import solve_lp
from coflow_hpn.model import port_loads
from coflow_hpn.relaxations import (DIV_TWCT, INDIV_TWCT, DecodeError, Horizon, LpTooLargeError,
                                    build, build_divisible_makespan_lp, build_divisible_twct_lp,
                                    build_indivisible_makespan_lp, build_indivisible_twct_lp,
                                    compute_horizon, decode_solution)

from conftest import instances, make_instance


def solved(relax):
    return decode_solution(relax, solve_lp(relax.lp))


# -- horizon ---------------------------------------------------------------------

def test_horizon_size_five():
    assert compute_horizon(make_instance([1], [(1, 0, {(1, 1): 5})])).L == 3


def test_horizon_exact_power_of_two():
    assert compute_horizon(make_instance([1], [(1, 0, {(1, 1): 8})])).L == 3
    assert compute_horizon(make_instance([2], [(1, 4, {(1, 1): 8})])).L == 3


def test_horizon_release_plus_bottleneck():
    inst = make_instance([1, 3], [(1, 6, {(1, 1): 4}), (1, 2, {(1, 2): 6})])
    assert compute_horizon(inst).L == 4


def test_horizon_minimum_one():
    assert compute_horizon(make_instance([4], [(1, 0, {(1, 1): 1})])).L == 1
    h = Horizon(3)
    assert h.boundaries == [1.0, 2.0, 4.0, 8.0] and h.tau(0) == 1.0


# -- makespan relaxations -----------------------------------------------------------

def test_indivisible_balance(two_fours):
    fa = solved(build_indivisible_makespan_lp(two_fours))
    assert fa.makespan == pytest.approx(8 / 3, abs=1e-6)
    assert fa.objective == pytest.approx(8 / 3, abs=1e-6)


def test_divisible_balance(two_fours):
    fa = solved(build_divisible_makespan_lp(two_fours))
    assert fa.makespan == pytest.approx(8 / 3, abs=1e-6)
    fast = sum(v for k, v in fa.x.items() if k[0] == 2)
    assert fast == pytest.approx(4 / 3, abs=1e-6)
    for total in fa.item_sums().values():
        assert total == pytest.approx(1.0, abs=1e-9)


def test_single_core_load_bound():
    inst = make_instance([3], [(1, 0, {(1, 1): 4, (1, 2): 5, (2, 2): 1})])
    fa = solved(build_indivisible_makespan_lp(inst))
    assert fa.makespan == pytest.approx(9 / 3, abs=1e-9)
    assert fa.x == {(1, 1): 1.0}
    assert fa.coflow_completion[1] == pytest.approx(fa.makespan)


def test_divisible_single_flow_is_fastest_core_time():
    # the per-flow row averages d / s_k over the split, so splitting never helps
    inst = make_instance([1, 2, 5], [(1, 0, {(1, 1): 10})])
    assert solved(build_divisible_makespan_lp(inst)).makespan == pytest.approx(10 / 5, abs=1e-9)


def test_divisible_equal_speeds_single_flow():
    inst = make_instance([2, 2], [(1, 0, {(1, 1): 8})])
    assert solved(build_divisible_makespan_lp(inst)).makespan == pytest.approx(4.0, abs=1e-9)


def test_disjoint_ports_one_core():
    inst = make_instance([2], [(1, 0, {(1, 1): 6}), (1, 0, {(2, 2): 3})])
    assert solved(build_divisible_makespan_lp(inst)).makespan == pytest.approx(3.0, abs=1e-9)


@settings(max_examples=40, deadline=None)
@given(instances(max_ports=3, max_cores=3, max_coflows=3))
def test_aggregate_capacity_bound(inst):
    total_speed = sum(inst.speeds().values())
    pl = port_loads(inst)
    worst = max(max(sum(pl.inputs_of(f).get(i, 0.0) for f in range(1, inst.n + 1))
                    for i in range(1, inst.num_ports + 1)),
                max(sum(pl.outputs_of(f).get(j, 0.0) for f in range(1, inst.n + 1))
                    for j in range(1, inst.num_ports + 1)))
    e_indiv = solved(build_indivisible_makespan_lp(inst)).makespan
    e_div = solved(build_divisible_makespan_lp(inst)).makespan
    assert e_indiv >= worst / total_speed - 1e-7
    assert e_div >= worst / total_speed - 1e-7
    assert e_div <= e_indiv + 1e-7


# -- TWCT relaxations ---------------------------------------------------------------

def test_twct_single_flow():
    inst = make_instance([1], [(1, 0, {(1, 1): 2})])
    fa = solved(build_indivisible_twct_lp(inst, compute_horizon(inst)))
    assert fa.objective == pytest.approx(2.0, abs=1e-9)
    assert fa.coflow_completion[1] == pytest.approx(2.0, abs=1e-9)


def test_twct_release_shifts_completion():
    inst = make_instance([1], [(1, 3, {(1, 1): 2})])
    fa = solved(build_indivisible_twct_lp(inst, compute_horizon(inst)))
    assert fa.coflow_completion[1] == pytest.approx(5.0, abs=1e-9)


def test_twct_two_unit_coflows():
    inst = make_instance([1], [(1, 0, {(1, 1): 1}), (1, 0, {(1, 1): 1})])
    obj = solved(build_indivisible_twct_lp(inst, compute_horizon(inst))).objective
    assert 2.0 - 1e-9 <= obj <= 3.0 + 1e-9


def test_divisible_twct_disjoint_flows():
    inst = make_instance([1], [(1, 0, {(1, 1): 2, (2, 2): 3})])
    fa = solved(build_divisible_twct_lp(inst, compute_horizon(inst)))
    c = fa.flow_completion
    assert fa.coflow_completion[1] == pytest.approx(max(c.values()), abs=1e-7)
    assert fa.coflow_completion[1] == pytest.approx(3.0, abs=1e-7)


@settings(max_examples=30, deadline=None)
@given(instances(max_ports=3, max_cores=3, max_coflows=3))
def test_single_flow_coflows_coincide(inst):
    single = make_instance([c.speed for c in inst.cores],
                           [(cf.weight, cf.release, dict([next(iter(cf.demand.items()))]))
                            for cf in inst.coflows], N=inst.num_ports)
    h = compute_horizon(single)
    a = solved(build_indivisible_twct_lp(single, h)).objective
    b = solved(build_divisible_twct_lp(single, h)).objective
    assert b == pytest.approx(a, rel=1e-7, abs=1e-7)


def test_weight_scaling_doubles_objective():
    base = [(1, 0, {(1, 1): 3, (1, 2): 2}), (2, 1, {(2, 1): 4})]
    inst = make_instance([1, 2], base)
    heavy = make_instance([1, 2], [(2 * w, r, d) for w, r, d in base])
    for builder in (build_indivisible_twct_lp, build_divisible_twct_lp):
        a = solved(builder(inst, compute_horizon(inst))).objective
        b = solved(builder(heavy, compute_horizon(heavy))).objective
        assert b == pytest.approx(2 * a, rel=1e-9)


def test_divisible_twct_variable_count():
    inst = make_instance([1, 2, 4], [(1, 0, {(1, 1): 3, (1, 2): 2}), (2, 1, {(2, 1): 4})])
    h = compute_horizon(inst)
    relax = build_divisible_twct_lp(inst, h)
    assert relax.lp.num_variables == inst.m * inst.num_flows * h.L + inst.num_flows + inst.n
    assert relax.lp.num_variables == 3 * 3 * h.L + 3 + 2


def test_size_cap():
    inst = make_instance([1] * 50, [(1, 0, {(i, j): 1.0 for i in range(1, 11) for j in range(1, 11)})
                                    for _ in range(10)])
    with pytest.raises(LpTooLargeError):
        build(DIV_TWCT, inst)
    assert build(INDIV_TWCT, inst).lp.num_variables > 0


# -- decoding ----------------------------------------------------------------------

def test_decode_rejects_short_mass(two_fours):
    relax = build_indivisible_makespan_lp(two_fours)
    sol = solve_lp(relax.lp)
    x = sol.x.copy()
    for (k, f), idx in relax.x_index.items():
        if f == 1:
            x[idx] *= 0.9
    sol.x = x
    with pytest.raises(DecodeError):
        decode_solution(relax, sol)


def test_decode_clamps_tiny_negatives(two_fours):
    relax = build_indivisible_makespan_lp(two_fours)
    sol = solve_lp(relax.lp)
    x = sol.x.copy()
    idx = relax.x_index[(1, 1)]
    x[idx] -= 1e-8
    x[relax.x_index[(2, 1)]] += 1e-8
    sol.x = x
    fa = decode_solution(relax, sol)
    assert all(0.0 <= v <= 1.0 for v in fa.x.values())


@settings(max_examples=25, deadline=None)
@given(instances(max_ports=3, max_cores=3, max_coflows=3))
def test_decoded_fractions_are_distributions(inst):
    h = compute_horizon(inst)
    for relax in (build_indivisible_makespan_lp(inst), build_divisible_makespan_lp(inst),
                  build_indivisible_twct_lp(inst, h), build_divisible_twct_lp(inst, h)):
        fa = solved(relax)
        assert all(0.0 <= v <= 1.0 for v in fa.x.values())
        assert np.allclose(list(fa.item_sums().values()), 1.0, atol=1e-5)
