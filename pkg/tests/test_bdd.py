import itertools

from hypothesis import given, settings
from hypothesis import strategies as st

from s4synth.bdd import BDD, FALSE, TRUE


def test_constants_and_identities():
    b = BDD()
    x = b.variable("x")
    assert b.and_(x, b.not_(x)) == FALSE
    assert b.or_(x, b.not_(x)) == TRUE
    assert b.not_(b.not_(x)) == x
    assert b.variable("x") == x


def test_hash_consing_makes_equal_functions_equal_nodes():
    b = BDD()
    x, y, z = (b.variable(k) for k in "xyz")
    left = b.and_(x, b.or_(y, z))
    right = b.or_(b.and_(x, y), b.and_(z, x))
    assert left == right


def test_compose_substitutes_variables():
    b = BDD()
    x, y = b.variable("x"), b.variable("y")
    f = b.and_(x, y)
    var_x = b.var_of(x)
    g = b.compose(f, lambda v: TRUE if v == var_x else b.variable(b.variables[v]), {})
    assert g == y
    assert b.support(f) == {b.var_of(x), b.var_of(y)}


ops = st.lists(st.tuples(st.sampled_from(["and", "or", "not"]), st.integers(0, 20), st.integers(0, 20)), max_size=12)


@settings(max_examples=80, deadline=None)
@given(ops)
def test_evaluation_matches_truth_tables(program):
    b = BDD()
    names = ["a", "b", "c"]
    nodes = [b.variable(n) for n in names]
    tables = [lambda env, i=i: env[i] for i in range(3)]
    for op, i, j in program:
        f, g = nodes[i % len(nodes)], nodes[j % len(nodes)]
        tf, tg = tables[i % len(tables)], tables[j % len(tables)]
        if op == "and":
            nodes.append(b.and_(f, g))
            tables.append(lambda env, tf=tf, tg=tg: tf(env) and tg(env))
        elif op == "or":
            nodes.append(b.or_(f, g))
            tables.append(lambda env, tf=tf, tg=tg: tf(env) or tg(env))
        else:
            nodes.append(b.not_(f))
            tables.append(lambda env, tf=tf: not tf(env))
    for node, table in zip(nodes, tables):
        for env in itertools.product([False, True], repeat=3):
            assert b.evaluate(node, lambda v: env[v]) == table(env)
