import pytest
from hypothesis import given
from hypothesis import strategies as st

from datalogo.program import (
    ArityMismatch,
    Atom,
    Const,
    DatalogSyntaxError,
    FactBase,
    Program,
    ProgramError,
    Rule,
    UnsafeRule,
    Var,
    active_domain,
    facts_from_mapping,
    format_facts,
    lambda_of,
    parse_facts,
    parse_program,
    print_program,
    sigma_of,
)
from datalogo.semiring import Boolean, BoundedNatural, InstanceMismatch, Tropical

LINEAR_TC = "T(x,y) :- E(x,y). T(x,y) :- T(x,z) * E(z,y)."
BINARY_TC = "T(x,y) :- E(x,y).\nT(x,y) :- T(x,z) * T(z,y).\n"


def test_parse_linear_tc():
    prog = parse_program(LINEAR_TC)
    assert len(prog.rules) == 2
    assert prog.idb_predicates == {"T"}
    assert prog.edb_predicates == {"E"}
    assert prog.rules[1].body[0] == Atom("T", (Var("x"), Var("z")))


def test_parse_empty():
    prog = parse_program("")
    assert prog.rules == ()
    assert prog.idb_predicates == frozenset()
    assert prog.edb_predicates == frozenset()
    assert parse_program("% nothing here\n\n").rules == ()


def test_unsafe_rule():
    with pytest.raises(UnsafeRule):
        parse_program("T(x,y) :- E(y,z).")


def test_arity_mismatch():
    with pytest.raises(ArityMismatch):
        parse_program("T(x) :- E(x,y). T(x,y) :- E(x,y).")


def test_syntax_error_position():
    with pytest.raises(DatalogSyntaxError) as info:
        parse_program("T(x,y) :- E(x,y).\nT(x,y) :- E(x,y) E(y,x).\n")
    assert (info.value.line, info.value.column) == (2, 18)
    with pytest.raises(DatalogSyntaxError):
        parse_program("T(x) :- E(x)")
    with pytest.raises(DatalogSyntaxError):
        parse_program("T(x) :- E(x) + F(x).")


def test_terms_and_constants():
    prog = parse_program('R(x, "a b", Node1, 7) :- S(x).')
    head = prog.rules[0].head
    assert head.args == (Var("x"), Const("a b"), Const("Node1"), Const("7"))
    assert prog.constants() == {"a b", "Node1", "7"}
    assert str(head) == 'R(x,"a b",Node1,7)'


def test_nullary_atoms():
    prog = parse_program("Goal :- E(x).")
    assert print_program(prog) == "Goal :- E(x).\n"


def test_lambda():
    assert lambda_of(parse_program(LINEAR_TC)) == 2
    assert lambda_of(parse_program(BINARY_TC)) == 2
    assert lambda_of(parse_program("A(x) :- E(x).")) == 1
    assert lambda_of(parse_program("")) == 0


def test_sigma_and_adom():
    trop = Tropical()
    prog = parse_program(BINARY_TC)
    same = facts_from_mapping(trop, [("E", (1, 2), 1), ("E", (2, 3), 1), ("E", (3, 4), 1)])
    assert sigma_of(prog, same) == (1, [trop.element(1)])
    distinct = facts_from_mapping(trop, [("E", (1, 2), 1), ("E", (2, 3), 2), ("E", (3, 4), 3)])
    count, values = sigma_of(prog, distinct)
    assert count == 3 == len(values)
    assert active_domain(prog, distinct) == {"1", "2", "3", "4"}
    empty = FactBase(trop, {})
    assert sigma_of(prog, empty) == (0, [])
    assert active_domain(prog, empty) == set()
    loop = facts_from_mapping(trop, [("E", (7, 7), 5)])
    assert active_domain(prog, loop) == {"7"}


def test_stats_invariant_under_reordering():
    rules = parse_program(LINEAR_TC + " S(x) :- E(x,y) * E(y,x) * E(x,x).").rules
    facts = facts_from_mapping(Tropical(), [("E", (1, 2), 4), ("E", (2, 1), 4)])
    for perm in (rules, rules[::-1], rules[1:] + rules[:1]):
        prog = Program(perm)
        assert lambda_of(prog) == 3
        assert sigma_of(prog, facts)[0] == 1


def test_parse_facts():
    text = "predicate\tsrc\tdst\tvalue\n# comment\n\nE\t1\t2\t3\nE\t2\t3\t1\n"
    fb = parse_facts(text, BoundedNatural(4))
    assert len(fb) == 2
    assert fb.get("E", ("1", "2")) == BoundedNatural(4).element(3)
    assert parse_facts(format_facts(fb), BoundedNatural(4)) == fb


@pytest.mark.parametrize(
    "text",
    ["E\t1\t2\t0\n", "E\t1\t2\t1\nE\t1\t2\t2\n", "E\t1\t2\tseven\n", "E\t1\t2\t9\n", "E\n"],
)
def test_bad_facts(text):
    with pytest.raises(ProgramError):
        parse_facts(text, BoundedNatural(4))


def test_facts_arity_and_instance():
    with pytest.raises(ArityMismatch):
        facts_from_mapping(Boolean(), [("E", (1, 2), True), ("E", (1,), True)])
    with pytest.raises(InstanceMismatch):
        FactBase(Boolean(), {("E", ("1",)): Tropical().element(1)})
    fb = facts_from_mapping(Boolean(), [("T", (1, 2), True)])
    with pytest.raises(ProgramError):
        fb.validate_against(parse_program(LINEAR_TC))


names = st.sampled_from(["E", "T", "Path", "R2", "s"])
variables = st.sampled_from(["x", "y", "z1", "_w"]).map(Var)
constants = st.one_of(
    st.sampled_from(["1", "42", "Node", "A_b"]),
    st.text(alphabet='ab "\\%.', max_size=4),
).map(Const)


@st.composite
def programs(draw):
    arity = {}
    rules = []
    for _ in range(draw(st.integers(0, 4))):
        def atom(pred):
            k = arity.setdefault(pred, draw(st.integers(0, 3)))
            return Atom(pred, tuple(draw(st.one_of(variables, constants)) for _ in range(k)))

        body = [atom(draw(names)) for _ in range(draw(st.integers(1, 3)))]
        body_vars = sorted(set().union(*(a.variables() for a in body)))
        head_pred = draw(names)
        k = arity.setdefault(head_pred, draw(st.integers(0, 3)))
        head_args = tuple(
            Var(draw(st.sampled_from(body_vars))) if body_vars and draw(st.booleans()) else draw(constants)
            for _ in range(k)
        )
        rules.append(Rule(Atom(head_pred, head_args), tuple(body)))
    return Program(tuple(rules))


@given(programs())
def test_round_trip(prog):
    assert parse_program(print_program(prog)) == prog
