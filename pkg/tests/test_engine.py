import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from datalogo.engine import (
    c_bound,
    effective_stability,
    evaluate_to_fixpoint,
    h_bound,
    iterate,
    iteration_guard,
    step,
    theorem_bound,
    zero_state,
)
from datalogo.grounding import GroundedSystem, ground, prune_inactive
from datalogo.program import facts_from_mapping, parse_program
from datalogo.semiring import Boolean, BoundedNatural, MaxPlus, Tropical
from oracles import bound_by_decimal, floyd_warshall, reachable_pairs

LINEAR = parse_program("T(x,y) :- E(x,y). T(x,y) :- T(x,z) * E(z,y).")
BINARY = parse_program("T(x,y) :- E(x,y). T(x,y) :- T(x,z) * T(z,y).")


def system_for(prog, sr, edges):
    return prune_inactive(ground(prog, facts_from_mapping(sr, [("E", e, v) for e, v in edges.items()])))


def test_bound_examples():
    assert theorem_bound(1, 2, 2, 2) == 249
    assert theorem_bound(1, 1, 1, 1) == 12
    assert theorem_bound(0, 5, 3, 2) == 0
    assert h_bound(1, 2, 2) == 16
    assert h_bound(2, 2, 2) == 48
    assert h_bound(0, 3, 2) == 0
    assert [c_bound(n) for n in (1, 2, 4)] == [2, 5, 14]


@pytest.mark.parametrize("args", [(p, n, s, l) for p in (1, 2, 7) for n in (1, 2, 3, 6, 20)
                                  for s in (0, 1, 2, 3, 4, 5) for l in (0, 1, 2, 3, 7)])
def test_bound_matches_decimal_oracle(args):
    assert theorem_bound(*args) == bound_by_decimal(*args)


def test_bound_large_inputs_use_high_precision():
    # exponent far beyond the exact big-integer route
    p, n, s, l = 3, 400, 9, 5
    assert theorem_bound(p, n, s, l) == bound_by_decimal(p, n, s, l)


@settings(max_examples=200)
@given(st.integers(0, 4), st.integers(0, 6), st.integers(0, 5), st.integers(0, 5), st.sampled_from(range(4)))
def test_bound_monotone(p, n, s, l, which):
    args = [p, n, s, l]
    bigger = list(args)
    bigger[which] += 1
    assert theorem_bound(*bigger) >= theorem_bound(*args)


def test_guard_handles_p_zero():
    assert iteration_guard(0, 3, 0, 2) == max(theorem_bound(1, 3, 0, 2), 4)
    assert iteration_guard(0, 3, 0, 2) > 0


def test_step_constants_only():
    sr = BoundedNatural(4)
    system = GroundedSystem.from_polynomials(sr, [[(2, ())], [(3, ()), (1, ())]])
    once = step(system, zero_state(system))
    assert [x.value for x in once] == [2, 4]
    assert step(system, once) == once


def test_step_tropical_chain():
    trop = Tropical()
    system = system_for(BINARY, trop, {("1", "2"): 1, ("2", "3"): 1, ("3", "4"): 1})
    idx = {a[1]: i for i, a in enumerate(system.atoms)}
    inf = trop.zero()
    s1 = iterate(system, 1)
    assert [s1[idx[k]] for k in (("1", "2"), ("2", "3"), ("3", "4"))] == [trop.element(1)] * 3
    assert s1[idx[("1", "3")]] == inf and s1[idx[("1", "4")]] == inf
    s2 = iterate(system, 2)
    assert s2[idx[("1", "3")]] == trop.element(2) == s2[idx[("2", "4")]]
    assert s2[idx[("1", "4")]] == inf
    assert iterate(system, 3)[idx[("1", "4")]] == trop.element(3)


def test_step_boolean_chain():
    system = system_for(LINEAR, Boolean(), {("1", "2"): True, ("2", "3"): True})
    idx = {a[1]: i for i, a in enumerate(system.atoms)}
    assert iterate(system, 1)[idx[("1", "3")]].is_zero
    assert not iterate(system, 2)[idx[("1", "3")]].is_zero


def test_step_is_synchronous():
    # X0 = 1, X1 = X0, X2 = X1: a Gauss-Seidel sweep would fill all three at once
    sr = Boolean()
    system = GroundedSystem.from_polynomials(sr, [[(True, ())], [(True, (0,))], [(True, (1,))]])
    frozen = zero_state(system)
    snapshot = tuple(frozen)
    s1 = step(system, frozen)
    assert frozen == snapshot
    assert [x.value for x in s1] == [True, False, False]


def test_fixpoint_path4():
    system = system_for(LINEAR, Boolean(), {("1", "2"): True, ("2", "3"): True, ("3", "4"): True})
    report = evaluate_to_fixpoint(system)
    assert report.converged and report.fixpoint_index == 3
    assert report.steps_executed == 4 <= report.max_iters
    assert {a[1] for a, v in zip(system.atoms, report.final_state) if not v.is_zero} == reachable_pairs(
        [("1", "2"), ("2", "3"), ("3", "4")]
    )
    assert report.deltas == [3, 2, 1, 0]


def test_empty_system():
    system = GroundedSystem.from_polynomials(Tropical(), [])
    report = evaluate_to_fixpoint(system)
    assert report.converged and report.fixpoint_index == 0


def test_apsp_matches_floyd_warshall():
    rng = random.Random(3)
    trop = Tropical()
    for _ in range(10):
        verts = [str(i) for i in range(rng.randint(2, 6))]
        edges = {(u, v): rng.randint(1, 9) for u in verts for v in verts if rng.random() < 0.35}
        if not edges:
            continue
        system = system_for(BINARY, trop, edges)
        report = evaluate_to_fixpoint(system)
        assert report.converged
        dist = floyd_warshall(verts, edges)
        got = {a[1]: v.value for a, v in zip(system.atoms, report.final_state)}
        assert got == {k: d for k, d in dist.items() if d != float("inf")}


def test_maxplus_does_not_converge():
    system = system_for(LINEAR, MaxPlus(), {("1", "2"): 1, ("2", "1"): 1})
    report = evaluate_to_fixpoint(system, 50)
    assert not report.converged
    assert report.steps_executed == 50
    assert report.bound.stability_reading == "not-stable-within-cap"
    with pytest.raises(ValueError):
        evaluate_to_fixpoint(system, "auto")


def test_effective_stability():
    assert effective_stability(system_for(LINEAR, Boolean(), {("1", "2"): True})) == 0
    assert effective_stability(system_for(LINEAR, Tropical(), {("1", "2"): 4, ("2", "3"): 0})) == 0
    b3 = BoundedNatural(3)
    system = GroundedSystem.from_polynomials(b3, [[(1, ()), (1, (0,))]])
    assert effective_stability(system) == 2


def test_report_json_shape():
    system = system_for(LINEAR, Tropical(), {("1", "2"): 2, ("2", "3"): 5})
    data = evaluate_to_fixpoint(system).to_json()
    assert set(data) >= {"converged", "fixpoint_index", "steps_executed", "bound", "state", "deltas"}
    assert set(data["bound"]) >= {"p", "n", "sigma", "lambda", "theorem_bound"}
    assert data["state"][0] == {"atom": "T(1,2)", "value": 2}


def test_explicit_p_and_max_iters():
    system = system_for(LINEAR, BoundedNatural(2), {("1", "2"): 1, ("2", "1"): 1})
    report = evaluate_to_fixpoint(system, p=1)
    assert report.bound.stability_reading == "explicit"
    assert report.converged
    short = evaluate_to_fixpoint(system, 1)
    assert not short.converged and short.max_iters == 1
