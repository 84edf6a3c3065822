"""Parser, translation, and lasso-oracle tests for the LTL layer."""

import random

import pytest

from manipstack.errors import LtlSyntaxError, NbaFormatError, NegationExcluded, NextExcluded
from manipstack.ltl import (
    And,
    Atom,
    Always,
    Eventually,
    Nba,
    Or,
    Predicate,
    Until,
    accepts_lasso,
    atoms_of,
    export_nba,
    import_nba,
    parse_formula,
    parse_guard,
    print_formula,
    translate_to_nba,
)

from oracles import ltl_semantics

P1 = Predicate("grasp", 1)
P2 = Predicate("grasp", 2)
P3 = Predicate("release", 1, 1)

E = frozenset()


def s(*preds):
    return frozenset(preds)


# ---------------------------------------------------------------- parser


def test_parse_sequencing_formula():
    f = parse_formula("F (grasp(1) & F release(1,1))")
    assert f == Eventually(And(Atom(P1), Eventually(Atom(P3))))


def test_parse_single_atom():
    assert parse_formula("grasp(2)") == Atom(P2)


def test_negation_rejected_with_operator_name():
    with pytest.raises(NegationExcluded) as exc:
        parse_formula("! grasp(1)")
    assert "!" in str(exc.value)


def test_next_rejected():
    with pytest.raises(NextExcluded) as exc:
        parse_formula("X grasp(1)")
    assert "X" in str(exc.value)


def test_syntax_error_carries_position():
    with pytest.raises(LtlSyntaxError) as exc:
        parse_formula("F (grasp(1) &")
    assert exc.value.position is not None


def test_precedence_until_loosest():
    # U < | < & < unary
    f = parse_formula("grasp(1) & grasp(2) | release(1,1) U grasp(1)")
    assert isinstance(f, Until)
    assert isinstance(f.left, Or)
    assert isinstance(f.left.left, And)


def test_unary_binds_tightest():
    f = parse_formula("F grasp(1) & grasp(2)")
    assert f == And(Eventually(Atom(P1)), Atom(P2))


def test_true_rejected_in_formula_allowed_in_guard():
    with pytest.raises(LtlSyntaxError):
        parse_formula("true")
    parse_guard("true")


def test_guard_rejects_temporal():
    with pytest.raises(LtlSyntaxError):
        parse_guard("F grasp(1)")


def _random_formula(rng, depth, preds):
    if depth == 0 or rng.random() < 0.3:
        return Atom(rng.choice(preds))
    op = rng.choice(["and", "or", "F", "G", "U"])
    if op == "and":
        return And(_random_formula(rng, depth - 1, preds), _random_formula(rng, depth - 1, preds))
    if op == "or":
        return Or(_random_formula(rng, depth - 1, preds), _random_formula(rng, depth - 1, preds))
    if op == "F":
        return Eventually(_random_formula(rng, depth - 1, preds))
    if op == "G":
        return Always(_random_formula(rng, depth - 1, preds))
    return Until(_random_formula(rng, depth - 1, preds), _random_formula(rng, depth - 1, preds))


def test_parse_print_roundtrip():
    rng = random.Random(20240)
    for _ in range(200):
        f = _random_formula(rng, rng.randint(0, 4), [P1, P2, P3])
        assert parse_formula(print_formula(f)) == f


# ---------------------------------------------------------------- accepts_lasso


def _two_state_eventually_nba():
    from manipstack.ltl import parse_guard as g

    return Nba(
        n_states=2,
        initial=frozenset({0}),
        final=frozenset({1}),
        transitions={
            0: [(g("true"), 0), (g("grasp(1)"), 1)],
            1: [(g("true"), 1)],
        },
    )


def test_lasso_eventually_true_when_pi_recurs():
    nba = _two_state_eventually_nba()
    assert accepts_lasso(nba, [E], [s(P1)])


def test_lasso_eventually_false_when_pi_never():
    nba = _two_state_eventually_nba()
    assert not accepts_lasso(nba, [], [E])


def test_lasso_recurrence_automaton():
    nba = translate_to_nba(parse_formula("G F grasp(1) & G F grasp(2)"))
    assert accepts_lasso(nba, [], [s(P1), s(P2)])
    assert not accepts_lasso(nba, [], [s(P1)])
    assert not accepts_lasso(nba, [s(P1), s(P2)], [E])


# ---------------------------------------------------------------- translation


def _all_words(alphabet, max_prefix, max_cycle):
    # exhaustive small lasso words
    from itertools import product

    for lp in range(0, max_prefix + 1):
        for lc in range(1, max_cycle + 1):
            for pre in product(alphabet, repeat=lp):
                for cyc in product(alphabet, repeat=lc):
                    yield list(pre), list(cyc)


def test_translate_eventually_matches_oracle_exhaustively():
    f = parse_formula("F grasp(1)")
    nba = translate_to_nba(f)
    alphabet = [E, s(P1)]
    for pre, cyc in _all_words(alphabet, 4, 4):
        assert accepts_lasso(nba, pre, cyc) == ltl_semantics(f, pre, cyc), (pre, cyc)


def test_translate_sequencing_examples():
    f = parse_formula("F (grasp(1) & F grasp(2))")
    nba = translate_to_nba(f)
    assert accepts_lasso(nba, [E, s(P1), s(P2)], [E])
    # pi2 before pi1, never again pi2 afterwards: reject
    assert not accepts_lasso(nba, [s(P2), s(P1)], [E])
    # pi2 before pi1 but pi2 recurs after: accept
    assert accepts_lasso(nba, [s(P2)], [s(P1), s(P2)])


def test_translation_guards_are_negation_free():
    from manipstack.ltl.ast import And as GAnd, Atom as GAtom, Or as GOr, Top

    for text in ["F grasp(1)", "G F grasp(1) & G F grasp(2)", "grasp(1) U release(1,1)"]:
        nba = translate_to_nba(parse_formula(text))
        for outs in nba.transitions.values():
            for guard, _ in outs:
                stack = [guard]
                while stack:
                    node = stack.pop()
                    assert isinstance(node, (GAnd, GOr, GAtom, Top))
                    if isinstance(node, (GAnd, GOr)):
                        stack.extend([node.left, node.right])


CORPUS_SEED = 7741


def _corpus(n_formulas, rng):
    preds = [P1, P2, P3]
    seen = set()
    out = []
    while len(out) < n_formulas:
        f = _random_formula(rng, rng.randint(1, 4), preds)
        if f in seen:
            continue
        seen.add(f)
        out.append(f)
    return out


def test_translation_agrees_with_semantics_oracle_on_corpus():
    """Formula corpus x lasso words: automaton membership == direct semantics."""
    rng = random.Random(CORPUS_SEED)
    formulas = _corpus(60, rng)
    alphabet = [E, s(P1), s(P2), s(P3), s(P1, P2)]
    checked = 0
    for f in formulas:
        nba = translate_to_nba(f)
        for _ in range(12):
            pre = [rng.choice(alphabet) for _ in range(rng.randint(0, 4))]
            cyc = [rng.choice(alphabet) for _ in range(rng.randint(1, 3))]
            assert accepts_lasso(nba, pre, cyc) == ltl_semantics(f, pre, cyc), (
                print_formula(f),
                pre,
                cyc,
            )
            checked += 1
    assert checked >= 500


# ---------------------------------------------------------------- import/export


NBA_TEXT = """
states: 2
initial: 0
final: 1
trans: 0 true 0
trans: 0 grasp(1) 1
trans: 1 true 1
"""


def test_import_wellformed():
    nba = import_nba(NBA_TEXT)
    assert nba.n_states == 2
    assert nba.final == frozenset({1})
    assert len(nba.out_edges(0)) == 2


def test_import_rejects_undeclared_final():
    bad = NBA_TEXT.replace("final: 1", "final: 7")
    with pytest.raises(NbaFormatError):
        import_nba(bad)


def test_import_reports_line_of_bad_guard():
    bad = NBA_TEXT.replace("trans: 0 grasp(1) 1", "trans: 0 grasp(x) 1")
    with pytest.raises(NbaFormatError) as exc:
        import_nba(bad)
    assert "line" in str(exc.value)


def test_export_import_roundtrip_on_generated():
    rng = random.Random(99)
    for _ in range(25):
        f = _random_formula(rng, rng.randint(1, 3), [P1, P2])
        nba = translate_to_nba(f)
        text = export_nba(nba)
        again = import_nba(text)
        assert export_nba(again) == text
        # language preserved on a sample of words
        alphabet = [E, s(P1), s(P2)]
        for _ in range(6):
            pre = [rng.choice(alphabet) for _ in range(rng.randint(0, 3))]
            cyc = [rng.choice(alphabet) for _ in range(rng.randint(1, 2))]
            assert accepts_lasso(nba, pre, cyc) == accepts_lasso(again, pre, cyc)


def test_atoms_of_collects_predicates():
    f = parse_formula("F (grasp(1) & F release(1,1))")
    assert atoms_of(f) == {P1, P3}
