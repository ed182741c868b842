"""Term core: canonical graphs, bisimilarity, positions, substitution,
and the mu-term parser, cross-checked against a naive nested-tuple
implementation on the finite fragment."""

from __future__ import annotations

import pytest
from hypothesis import given, settings, strategies as st

from itrsbench import (
    ParseError,
    Signature,
    TermError,
    app,
    bisimilar,
    graph_term,
    parallel,
    parse,
    positions,
    prefix_of,
    replace,
    substitute,
    subterm,
    term_depth,
    to_text,
    topequ,
    var,
    variables,
)
from conftest import GENERIC_SIG, random_finite_term, random_rational_term, rng_for


# --- a naive finite-term oracle ---------------------------------------------------
# ("var", name) or (symbol, (children...)) as plain nested tuples.


def naive_of(t):
    if t.is_var:
        return ("var", t.nodes[0][1])
    return (t.root_symbol, tuple(naive_of(subterm(t, (i,))) for i in
                                 range(1, len(t.nodes[0][2]) + 1)))


def naive_positions(n, prefix=()):
    out = {prefix}
    if n[0] != "var":
        for i, child in enumerate(n[1], start=1):
            out |= naive_positions(child, prefix + (i,))
    return out


def naive_subterm(n, p):
    for i in p:
        n = n[1][i - 1]
    return n


def naive_depth(n):
    if n[0] == "var" or not n[1]:
        return 0
    return 1 + max(naive_depth(c) for c in n[1])


@pytest.mark.parametrize("seed", range(20))
def test_finite_oracle_agreement(seed):
    rng = rng_for(f"terms-oracle-{seed}")
    t = random_finite_term(rng, GENERIC_SIG, max_depth=4)
    n = naive_of(t)
    assert positions(t, 10) == naive_positions(n)
    assert term_depth(t) == naive_depth(n)
    for p in sorted(naive_positions(n)):
        assert naive_of(subterm(t, p)) == naive_subterm(n, p)


# --- canonical forms and bisimilarity ----------------------------------------------


def test_hash_consing_identity():
    a = app("F", [var("x"), app("c")])
    b = app("F", [var("x"), app("c")])
    assert a is b


def test_bisimilar_presentations_are_equal():
    one = parse("mu X. S(X)")
    two = parse("mu X. S(S(X))")
    three = graph_term({"a": ("S", ["b"]), "b": ("S", ["a"])}, "a")
    assert one == two == three
    assert bisimilar(one, two)


def test_distinct_infinite_trees_differ():
    spine = parse("mu X. F(X, c)")
    other = parse("mu X. F(c, X)")
    assert spine != other
    assert not bisimilar(spine, other)


def test_canonical_equality_matches_bisimilarity_randomized():
    rng = rng_for("terms-bisim")
    sig = GENERIC_SIG
    for _ in range(200):
        t = random_rational_term(rng, sig, n_nodes=4)
        u = random_rational_term(rng, sig, n_nodes=4)
        assert bisimilar(t, u) == (t == u)
        assert bisimilar(t, t)


# --- positions, subterms, replacement -----------------------------------------------


def test_positions_of_cyclic_term_bounded():
    t = parse("mu X. S(X)")
    assert positions(t, 3) == {(), (1,), (1, 1), (1, 1, 1)}


def test_subterm_of_spine_is_itself():
    t = parse("mu X. S(X)")
    assert subterm(t, (1, 1, 1)) == t


def test_replace_then_read_back():
    rng = rng_for("terms-replace")
    for _ in range(100):
        t = random_finite_term(rng, GENERIC_SIG, 4)
        u = random_finite_term(rng, GENERIC_SIG, 2)
        ps = sorted(positions(t, 6))
        p = rng.choice(ps)
        assert subterm(replace(t, p, u), p) == u


def test_replace_identity():
    rng = rng_for("terms-replace-id")
    for _ in range(100):
        t = random_rational_term(rng, GENERIC_SIG, 4)
        p = rng.choice(sorted(positions(t, 3)))
        assert replace(t, p, subterm(t, p)) == t


def test_replace_invalid_position_is_noop():
    t = app("c")
    assert replace(t, (1, 2), var("x")) == t


def test_topequ():
    t = parse("F(G(c), d)")
    u = parse("F(G(d), c)")
    assert topequ(t, (1,), u)
    # only symbols strictly above the position are compared, so the
    # differing leaves at (1,1) do not matter
    assert topequ(t, (1, 1), u)
    assert not topequ(t, (2, 1), u)


# --- substitution -------------------------------------------------------------------


def test_substitute_homomorphic():
    t = parse("F(x, G(y))")
    sigma = {"x": parse("mu X. S(X)"), "y": app("c")}
    got = substitute(sigma, t)
    assert subterm(got, (1,)) == sigma["x"]
    assert subterm(got, (2, 1)) == app("c")
    assert variables(got) == set()


def test_substitute_untouched_variables():
    t = parse("F(x, z)")
    got = substitute({"x": app("c")}, t)
    assert variables(got) == {"z"}


def test_substitute_into_cycle():
    t = parse("mu X. F(X, y)")
    got = substitute({"y": app("c")}, t)
    assert got == parse("mu X. F(X, c)", GENERIC_SIG)


# --- parser and printer --------------------------------------------------------------


@pytest.mark.parametrize(
    "text",
    ["x", "c", "F(x, y)", "F(G(H(c)), d)", "mu X. F(X, c)", "F(mu X. G(X), x)"],
)
def test_parse_print_round_trip(text):
    t = parse(text, GENERIC_SIG)
    assert parse(to_text(t), GENERIC_SIG) == t


def test_parse_round_trip_randomized():
    rng = rng_for("terms-print")
    for _ in range(200):
        t = random_rational_term(rng, GENERIC_SIG, 5)
        assert parse(to_text(t), GENERIC_SIG) == t


def test_parse_errors():
    with pytest.raises(ParseError):
        parse("F(x", GENERIC_SIG)
    with pytest.raises(ParseError):
        parse("Unknown(x)", GENERIC_SIG)
    with pytest.raises(ParseError):
        parse("F(x)", GENERIC_SIG)  # wrong arity
    with pytest.raises(ParseError):
        parse("mu X.", GENERIC_SIG)


def test_signature_rejects_bad_symbols():
    with pytest.raises(TermError):
        Signature({"F": -1})
    with pytest.raises(TermError):
        Signature({"": 1})


# --- position algebra ------------------------------------------------------------------


@given(
    st.lists(st.integers(1, 3), max_size=5),
    st.lists(st.integers(1, 3), max_size=5),
)
@settings(max_examples=200)
def test_prefix_parallel_trichotomy(p, q):
    p, q = tuple(p), tuple(q)
    assert parallel(p, q) == (not prefix_of(p, q) and not prefix_of(q, p))
    assert prefix_of(p, p)
    assert parallel(p, q) == parallel(q, p)
