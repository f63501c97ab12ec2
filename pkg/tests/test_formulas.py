import pytest
from hypothesis import given, settings, strategies as st

from scottlab.complexity import Classification, Side, classify, is_d_sigma, is_pi, is_sigma
from scottlab.errors import FormulaSyntaxError, OrdinalOverflowError, UnboundVariableError
from scottlab.ordinals import Ordinal
from scottlab.sexpr import format_formula, parse_formula, parse_formulas
from scottlab.syntax import (
    TOP,
    And,
    Atom,
    Const,
    Exists,
    Forall,
    Henkin,
    Or,
    Schema,
    Var,
    counting_exists,
    free_vars,
    implication,
    negate,
    neq,
    pi_conjuncts,
    sigma_disjuncts,
    substitute,
)

# ---------------------------------------------------------------------------
# Ordinals
# ---------------------------------------------------------------------------


def test_ordinal_parse_and_print():
    assert str(Ordinal.parse("w^2*3+w+1")) == "w^2*3+w+1"
    assert str(Ordinal.parse("0")) == "0"
    assert Ordinal.parse("w") == Ordinal.omega()


def test_ordinal_arithmetic_absorbs_finite_prefix():
    assert Ordinal.of(1) + Ordinal.omega() == Ordinal.omega()
    assert str(Ordinal.omega().successor()) == "w+1"
    assert Ordinal.omega() > 1000
    assert Ordinal.omega().successor() > Ordinal.omega()


def test_ordinal_finite_values():
    assert Ordinal.of(5).as_int == 5
    assert Ordinal.of(0).is_finite
    with pytest.raises(OrdinalOverflowError):
        _ = Ordinal.omega().as_int


@pytest.mark.parametrize("text", ["w^w", "", "x+1", "w^-1"])
def test_ordinal_rejects_out_of_range(text):
    with pytest.raises(OrdinalOverflowError):
        Ordinal.parse(text)


def test_negative_rank_rejected():
    with pytest.raises(OrdinalOverflowError):
        Ordinal.of(-1)


# ---------------------------------------------------------------------------
# Reader errors
# ---------------------------------------------------------------------------


def test_unclosed_list_reports_its_opening_position():
    with pytest.raises(FormulaSyntaxError) as info:
        parse_formula("(and (R x y)")
    assert (info.value.line, info.value.column) == (1, 1)
    assert str(info.value) == "1:1: end of input inside list"


def test_stray_close_paren_position():
    with pytest.raises(FormulaSyntaxError) as info:
        parse_formula("\n  (R x))")
    assert str(info.value) == "2:8: unexpected ')'"


@pytest.mark.parametrize(
    "text, message",
    [
        ("(forall x (R x))", "parenthesized variable list"),
        ("(R x) (R y)", "trailing input"),
        ("(and* nosuch () (x))", "Unsupported schema enumerator"),
        ("(P $-1)", "natural index"),
        ("(P 3)", "bare number"),
        ("(forall (x x) (R x x))", "repeated variable"),
        ("(and* ladder (U) (x) :bound)", ":bound needs a natural number"),
        ("", "no formula found"),
    ],
)
def test_reader_errors(text, message):
    with pytest.raises(FormulaSyntaxError, match=message):
        parse_formula(text)


# ---------------------------------------------------------------------------
# Sugar and printing
# ---------------------------------------------------------------------------


def test_counting_quantifier_expands_to_distinct_witnesses():
    x1, x2 = Var("x1"), Var("x2")
    expected = Exists(("x1", "x2"), And((neq(x1, x2), Atom("P", (x1,)), Atom("P", (x2,)))))
    assert parse_formula("(exists>= 2 (x) (P x))") == expected


def test_implication_is_expanded_while_reading():
    x = Var("x")
    assert parse_formula("(implies (P x) (Q x))") == Or((Atom("P", (x,), positive=False), Atom("Q", (x,))))


def test_sigma_and_pi_views():
    formula = parse_formula("(or (exists (y) (R x y)) (R x x))")
    assert sigma_disjuncts(formula) == [(("y",), parse_formula("(R x y)")), ((), parse_formula("(R x x)"))]
    assert pi_conjuncts(negate(formula)) == [(("y",), parse_formula("(not (R x y))")), ((), parse_formula("(not (R x x))"))]


def test_implication_between_quantified_formulas():
    result = implication(parse_formula("(exists (y) (R x y))"), parse_formula("(forall (z) (R z x))"))
    assert result == parse_formula("(forall (y z) (or (not (R x y)) (R z x)))")
    assert str(classify(result)) == "(Pi, 1)"


def test_terms_constants_and_henkins():
    formula = parse_formula("(R @c $3)")
    assert formula == Atom("R", (Const("c"), Henkin(3)))
    assert format_formula(formula) == "(R @c $3)"


def test_schema_round_trip():
    text = "(and* ladder (U) (x) :bound 5)"
    formula = parse_formula(text)
    assert formula == And(Schema("ladder", ("U",), (Var("x"),), bound=5))
    assert format_formula(formula) == text


def test_printer_is_a_fixed_point_on_the_corpus(data_dir):
    text = (data_dir / "formulas" / "corpus.sexp").read_text()
    for formula in parse_formulas(text):
        printed = format_formula(formula)
        assert format_formula(parse_formula(printed)) == printed


# ---------------------------------------------------------------------------
# Classification
# ---------------------------------------------------------------------------


@pytest.mark.parametrize(
    "text, expected",
    [
        ("(and (R x y) (not (= x y)))", "(Both, 0)"),
        ("(exists (x) (R x x))", "(Sigma, 1)"),
        ("(forall (x) (exists (y) (R x y)))", "(Pi, 2)"),
        ("(exists (x) (forall (y) (exists (z) (R y z))))", "(Sigma, 3)"),
        ("(and* ladder (U) (x))", "(Pi, 1)"),
        ("(or* ladder (U) (x))", "(Sigma, 1)"),
        ("(and* roots () (x1))", "(Pi, 1)"),
        ("(implies (R x x) (exists (y) (R y x)))", "(Sigma, 1)"),
        ("(and (R x x) (forall (y) (R x y)))", "(Pi, 1)"),
        ("true", "(Both, 0)"),
    ],
)
def test_classify(text, expected):
    assert str(classify(parse_formula(text))) == expected


def test_corpus_classifications(data_dir):
    formulas = parse_formulas((data_dir / "formulas" / "corpus.sexp").read_text())
    assert [str(classify(formula)) for formula in formulas] == [
        "(Both, 0)",
        "(Both, 0)",
        "(Pi, 2)",
        "(Sigma, 1)",
        "(Sigma, 1)",
        "(Sigma, 1)",
        "(Pi, 1)",
        "(Sigma, 1)",
        "(Pi, 1)",
        "(Sigma, 1)",
        "(Both, 0)",
        "(Both, 0)",
    ]


def test_sigma_and_pi_membership():
    formula = parse_formula("(forall (x) (exists (y) (R x y)))")
    assert is_pi(formula, 2)
    assert not is_pi(formula, 1)
    assert is_sigma(formula, 3)
    assert not is_sigma(formula, 2)


def test_d_sigma_takes_either_order():
    sigma = parse_formula("(exists (x) (P x))")
    pi = parse_formula("(forall (x) (P x))")
    assert is_d_sigma(And((sigma, pi)), 1)
    assert is_d_sigma(And((pi, sigma)), 1)
    assert not is_d_sigma(And((sigma, pi, sigma)), 1)
    assert not is_d_sigma(Or((sigma, pi)), 1)


def test_declared_classification_ranks():
    assert Classification.declared("Pi", 1).ranks() == (Ordinal.of(2), Ordinal.of(1))
    assert Classification.declared(Side.SIGMA, 2).dual() == Classification.declared("Pi", 2)


# ---------------------------------------------------------------------------
# Structural operations
# ---------------------------------------------------------------------------


def test_substitution_renames_capturing_binders():
    formula = Exists(("y",), Atom("R", (Var("x"), Var("y"))))
    assert substitute(formula, {"x": Var("y")}) == Exists(("y1",), Atom("R", (Var("y"), Var("y1"))))


def test_sentence_substitution_requires_closing_every_variable():
    with pytest.raises(UnboundVariableError):
        substitute(parse_formula("(R x y)"), {"x": Henkin(0)}, sentence=True)


def test_free_vars_skip_bound_names():
    assert free_vars(parse_formula("(forall (x) (R x y))")) == frozenset({"y"})
    assert free_vars(parse_formula("(and* ladder (U) (z))")) == frozenset({"z"})


def test_counting_zero_is_true():
    assert counting_exists(0, "x", Atom("P", (Var("x"),))) == TOP


# ---------------------------------------------------------------------------
# Properties over generated formulas
# ---------------------------------------------------------------------------

NAMES = st.sampled_from(["x", "y", "z"])
TERMS = st.one_of(NAMES.map(Var), st.just(Const("c")), st.integers(0, 3).map(Henkin))

ATOMS = st.one_of(
    st.builds(lambda a, b, positive: Atom("R", (a, b), positive), TERMS, TERMS, st.booleans()),
    st.builds(lambda a, positive: Atom("P", (a,), positive), TERMS, st.booleans()),
    st.builds(lambda a, b, positive: Atom("=", (a, b), positive), TERMS, TERMS, st.booleans()),
)

SCHEMAS = st.builds(
    lambda connective, name, bound, negated: connective(Schema("ladder", ("U",), (Var(name),), bound, negated)),
    st.sampled_from([And, Or]),
    NAMES,
    st.one_of(st.none(), st.integers(0, 5)),
    st.booleans(),
)

BLOCKS = st.lists(NAMES, min_size=1, max_size=2, unique=True).map(tuple)

FORMULAS = st.recursive(
    st.one_of(ATOMS, SCHEMAS),
    lambda children: st.one_of(
        st.lists(children, max_size=3).map(lambda parts: And(tuple(parts))),
        st.lists(children, max_size=3).map(lambda parts: Or(tuple(parts))),
        st.builds(Forall, BLOCKS, children),
        st.builds(Exists, BLOCKS, children),
    ),
    max_leaves=12,
)


@settings(max_examples=1000, deadline=None)
@given(FORMULAS)
def test_negation_is_an_involution(formula):
    assert negate(negate(formula)) == formula


@settings(max_examples=1000, deadline=None)
@given(FORMULAS)
def test_negation_dualizes_the_classification(formula):
    assert classify(negate(formula)) == classify(formula).dual()


@settings(max_examples=300, deadline=None)
@given(FORMULAS)
def test_printed_formulas_read_back_unchanged(formula):
    assert parse_formula(format_formula(formula)) == formula


@settings(max_examples=500, deadline=None)
@given(FORMULAS, NAMES, TERMS)
def test_substitution_commutes_with_negation(formula, name, term):
    assert substitute(negate(formula), {name: term}) == negate(substitute(formula, {name: term}))
