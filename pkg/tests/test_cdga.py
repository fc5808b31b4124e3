from fractions import Fraction
from math import comb

import pytest

import oracles
from jetfol.cdga import (
    AlgebraMismatchError,
    FiniteCDGA,
    InconsistentPresentationError,
    ModelPresentation,
    compile_presentation,
    evaluate_poly0,
    genus_surface_ring,
    heisenberg_ce,
    interval_model,
    presentation_from_dict,
    tensor_product,
    torus_ce,
    twisted_betti_weight,
    validate,
)
from jetfol.datasets import torus_interval_model


def test_heisenberg_betti_matches_oracle():
    ext = oracles.Exterior("abc", {"c": [(1, "ab")]})
    want = oracles.betti_from(ext.basis, lambda m: ext.d({m: Fraction(1)}), 3)
    assert heisenberg_ce().betti() == want == [1, 2, 2, 1]


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_torus_betti_binomial(n):
    assert torus_ce(n).betti() == [comb(n, p) for p in range(n + 1)]


@pytest.mark.parametrize("g", [1, 2, 3])
def test_genus_ring(g):
    m = genus_surface_ring(g)
    assert m.betti() == [1, 2 * g, 1]
    assert validate(m).passed
    for i in range(1, g + 1):
        assert m[f"alpha{i}"] * m[f"beta{i}"] == m["omega"]
        assert m[f"beta{i}"] * m[f"alpha{i}"] == -m["omega"]


def test_koszul_signs_and_parse_format():
    h = heisenberg_ce()
    assert h.parse("b*a") == -h.parse("a*b")
    assert h["a"] * h["a"] == h.zero()
    x = h.parse("2*a*b - 1/2*c")
    assert h.parse(h.format(x)) == x
    assert h["c"].d() == h.parse("a*b")
    assert (h["a"] * h["c"]).d() == h.zero()  # d(ac) = -a*ab = 0


def test_element_algebra_mismatch():
    with pytest.raises(AlgebraMismatchError):
        heisenberg_ce()["a"] + heisenberg_ce()["a"]


@pytest.mark.parametrize("factory", [heisenberg_ce, lambda: torus_ce(3), interval_model,
                                     torus_interval_model])
def test_builtin_models_validate(factory):
    rep = validate(factory())
    assert rep.passed, rep.first_failure()


def test_validate_full_mode_on_tables():
    t = torus_ce(2)
    table = {(i, j): t.mul_basis(i, j) for i in range(len(t)) for j in range(len(t))}
    copy = FiniteCDGA("torus_table", t.labels, t.degrees, table, {}, t.unit)
    rep = validate(copy)
    assert rep.passed and rep.mode == "full"


def test_validate_finds_commutativity_failure():
    # x*y = y*x = z with x, y odd breaks graded commutativity
    prod = {(0, i): {i: 1} for i in range(4)}
    prod.update({(i, 0): {i: 1} for i in range(4)})
    prod[(1, 2)] = {3: 1}
    prod[(2, 1)] = {3: 1}
    bad = FiniteCDGA("bad", ["1", "x", "y", "z"], [0, 1, 1, 2], prod, {}, 0)
    rep = validate(bad)
    assert not rep.passed
    assert "(-1)" in rep.failures[0]["identity"]


def test_validate_finds_leibniz_failure():
    prod = {(0, i): {i: 1} for i in range(4)}
    prod.update({(i, 0): {i: 1} for i in range(4)})
    prod[(1, 2)] = {3: 1}
    prod[(2, 1)] = {3: -1}
    # d x = z but d(x*y) should then be z*y = 0, while d(z) = 0; instead give d(1) nonzero
    bad = FiniteCDGA("bad", ["1", "x", "y", "z"], [0, 1, 1, 2], prod, {0: {1: 1}}, 0)
    assert not validate(bad).passed


def test_square_zero_violation_is_rejected():
    p = ModelPresentation("bad", [("a", 1), ("b", 1), ("c", 1), ("e", 1)],
                          {"a": "b*c", "c": "a*e"})
    with pytest.raises(InconsistentPresentationError):
        compile_presentation(p)


def test_degree_mismatch_and_even_generators():
    with pytest.raises(InconsistentPresentationError):
        compile_presentation(ModelPresentation("bad", [("a", 1), ("c", 1)], {"c": "a"}))
    with pytest.raises(ValueError):
        compile_presentation(ModelPresentation("even", [("x", 2)]))


def test_relations_and_dict_presentation():
    p = presentation_from_dict({
        "name": "quotient", "generators": [{"name": "a", "degree": 1}, {"name": "b", "degree": 1}], "relations": ["a*b"],
    })
    m = compile_presentation(p)
    assert m.dims() == [1, 2]
    assert m["a"] * m["b"] == m.zero()


def test_truncated_interval_model():
    # weight truncation keeps the ideal d-stable, so the interval is acyclic above degree 0
    assert interval_model().betti() == [1, 0]
    m = torus_interval_model()
    assert m.betti() == [1, 2, 1, 0]
    u = m["u"]
    assert (u * u).d() == (u * m["du"]).scale(2)
    assert evaluate_poly0(m.parse("alpha*u + beta"), {"u": Fraction(3)}) == m.parse("3*alpha + beta")


def test_tensor_product_kunneth():
    a, b = torus_ce(1), heisenberg_ce()
    t = tensor_product(a, b)
    ba, bb = a.betti(), b.betti()
    want = [sum(ba[i] * bb[n - i] for i in range(len(ba)) if 0 <= n - i < len(bb))
            for n in range(len(ba) + len(bb) - 1)]
    assert t.betti() == want
    assert validate(t).passed


def test_local_system_cohomology_matches_oracle():
    t = torus_ce(2)
    ext = oracles.Exterior(["e1", "e2"])
    for gamma_text, g in [("e1", [(1, ["e1"])]), ("e1 + 2*e2", [(1, ["e1"]), (2, ["e2"])])]:
        gamma = t.parse(gamma_text)
        for w in range(4):
            want = oracles.local_system_betti(ext, ext.elem(g), w)
            assert twisted_betti_weight(t, gamma, w) == want
    assert twisted_betti_weight(t, t["e1"], 1) == [0, 0, 0]
