"""Acceptance criteria 1-9.

Each test carries a ``criterion`` marker; the terminal summary prints one
PASS/FAIL line per criterion.  Tolerances are exact (zero) throughout.
"""

from __future__ import annotations

import random
import time
from fractions import Fraction

import pytest
import sympy

import oracles
from randomdata import model, perturb, random_jet, random_kernel, random_mc
from jetfol import cli
from jetfol.cdga import genus_surface_ring, validate
from jetfol.datasets import genus_data, genus_symp, heisenberg_b5
from jetfol.extension import extend_order, extension_class
from jetfol.jets import (
    GroupPresentation,
    JetMap,
    JetRepresentation,
    compose,
    inverse,
    kernel_dim,
    kernel_embed,
    module_action,
    rep_lift,
    rep_validate,
)
from jetfol.mc import (
    MaurerCartanData,
    RestrictedComplex,
    algebroid_betti,
    build_twisted,
    cohomology_ring,
    extension_cocycle,
    gysin_betti,
    mc_check,
    spectral_E1,
    twisted_betti,
)
from jetfol.symplectic import symp_check_closed, symp_restrict, variation
from jetfol.universal import (
    MaurerCartanViolation,
    base_change,
    ce_algebra,
    universal_S,
)

CASES = 200


def crit(n, text):
    return pytest.mark.criterion(n, text)


def heis_exterior():
    return oracles.Exterior("abc", {"c": [(1, "ab")]})


# -- 1 ------------------------------------------------------------------------

@crit(1, "Heisenberg algebroid Betti numbers (1,4,7,6,2) in under 5 s")
def test_heisenberg_algebroid_betti():
    start = time.perf_counter()
    betti = algebroid_betti(heisenberg_b5())
    elapsed = time.perf_counter() - start
    assert betti == [1, 4, 7, 6, 2]
    assert elapsed < 5.0


@crit(1, "Heisenberg algebroid Betti numbers (1,4,7,6,2) in under 5 s")
def test_heisenberg_twisted_betti_matches_oracle():
    ext = heis_exterior()
    etas = {1: ext.elem([(1, "a")]), 2: ext.elem([(1, "b")]), 3: ext.elem([(-1, "c")])}
    expected = oracles.twisted_betti(ext, 4, etas)
    assert twisted_betti(heisenberg_b5()) == expected == [0, 2, 5, 5, 2]
    base = oracles.betti_from(ext.basis, lambda m: ext.d({m: Fraction(1)}), 3)
    assert [x + y for x, y in zip(base + [0], expected)] == [1, 4, 7, 6, 2]


# -- 2 ------------------------------------------------------------------------

HEIS_DIFFERENTIALS = {
    0: "0", 1: "0", 2: "-a*t1", 3: "-2*a*t2 - b*t1", 4: "-3*a*t3 - 2*b*t2 + c*t1",
}
HEIS_PRODUCTS = {
    (0, 1): "0", (0, 2): "a*t1", (0, 3): "a*t2 + b*t1", (0, 4): "a*t3 + b*t2 - c*t1",
    (1, 2): "a*t2", (1, 3): "a*t3 + b*t2", (1, 4): "a*t4 + b*t3 - c*t2",
    (2, 3): "b*t3", (2, 4): "b*t4 - c*t3", (3, 4): "-c*t4",
}


def _tparse(tc, text):
    return tc.zero() if text == "0" else tc.parse(text)


@crit(2, "Heisenberg twisted differentials and listed products, coefficient-exact")
@pytest.mark.parametrize("r", sorted(HEIS_DIFFERENTIALS))
def test_heisenberg_differentials(r):
    tc = build_twisted(heisenberg_b5())
    assert tc.t(r).d() == _tparse(tc, HEIS_DIFFERENTIALS[r])


@crit(2, "Heisenberg twisted differentials and listed products, coefficient-exact")
@pytest.mark.parametrize("pair", sorted(HEIS_PRODUCTS))
def test_heisenberg_products(pair):
    tc = build_twisted(heisenberg_b5())
    s, r = pair
    assert tc.t(s) * tc.t(r) == _tparse(tc, HEIS_PRODUCTS[pair])
    assert tc.t(r) * tc.t(s) == _tparse(tc, HEIS_PRODUCTS[pair]).scale(-1)


# -- 3 ------------------------------------------------------------------------

T0_SECTOR = ["t0", "a*t0", "b*t0", "a*c*t0", "b*c*t0", "a*b*c*t0"]
OTHERS = ["t1", "b*t1", "b*t2 + c*t1", "a*t4 + 1/2*b*t3 - c*t2",
          "b*c*t1", "a*c*t3 + b*c*t2", "a*c*t4 + b*c*t3", "a*b*c*t4"]


@crit(3, "Heisenberg cohomology ring: two nonvanishing products and both class identities")
def test_heisenberg_ring_class_identities():
    ring = cohomology_ring(heisenberg_b5())
    tc = ring.complex
    x = tc.parse("a*t4 + 1/2*b*t3 - c*t2")
    assert not x.d()
    assert ring.same_class(tc.t(1) * x, tc.parse("1/6*b*c*t1"))
    assert ring.same_class(x * x, tc.parse("a*b*c*t4"))
    assert not ring.is_coboundary(tc.parse("b*c*t1"))
    assert not ring.is_coboundary(tc.parse("a*b*c*t4"))


@crit(3, "Heisenberg cohomology ring: two nonvanishing products and both class identities")
def test_heisenberg_ring_exactly_two_products():
    ring = cohomology_ring(heisenberg_b5())
    tc = ring.complex
    gens = [tc.parse(s) for s in T0_SECTOR + OTHERS]
    # the listed classes form a basis of the twisted cohomology
    assert [sum(1 for g in gens if g.degree == p) for p in range(5)] == [0, 2, 5, 5, 2]
    pairs = ring.nonvanishing_products(gens)
    names = T0_SECTOR + OTHERS
    assert {(names[i], names[j]) for i, j in pairs} == {
        ("t1", "a*t4 + 1/2*b*t3 - c*t2"),
        ("a*t4 + 1/2*b*t3 - c*t2", "a*t4 + 1/2*b*t3 - c*t2"),
    }


# -- 4 ------------------------------------------------------------------------

@crit(4, "Heisenberg extension class -2a*c, nontrivial, extension absent")
def test_heisenberg_extension_class():
    d = heisenberg_b5()
    h = d.model
    ec = extension_class(d)
    assert ec.cocycle.base == h.parse("-2*a*c")
    assert ec.cocycle.weight == -4
    assert not ec.is_trivial
    assert extend_order(d) is None


@crit(4, "Heisenberg extension class -2a*c, nontrivial, extension absent")
def test_heisenberg_extension_cli(capsys):
    import io
    import json
    out = io.StringIO()
    assert cli.run(["ext", "extend", "--data", "builtin:heisenberg-b5"], out, io.StringIO()) == 0
    assert json.loads(out.getvalue()) == {"extendable": False}
    out = io.StringIO()
    assert cli.run(["ext", "extend", "--data", "builtin:heisenberg-b5", "--expect-trivial"],
                   out, io.StringIO()) == 1


@crit(4, "Heisenberg extension class -2a*c, nontrivial, extension absent")
def test_heisenberg_extension_class_oracle():
    # c = sum_{i<k/2} (k-2i) eta_i eta_{k-i} = 2 eta_1 eta_3 for k = 4
    ext = heis_exterior()
    c = ext.scale(ext.mul(ext.elem([(1, "a")]), ext.elem([(-1, "c")])), 2)
    assert c == ext.elem([(-2, "ac")])
    # exact 2-forms are spanned by the images of a, b, c; -2ac is not among them
    images = [ext.d({m: Fraction(1)}) for m in ext.basis(1)]
    keys = ext.basis(2)
    rows = [[img.get(key, 0) for key in keys] for img in images]
    assert oracles.rank(rows + [[c.get(key, 0) for key in keys]], 3) > oracles.rank(rows, 3)
    d = heisenberg_b5()
    assert extension_cocycle(d) == d.model.parse("-2*a*c")


# -- 5 ------------------------------------------------------------------------

def _genus_params(rng, g, force_zero):
    params = [Fraction(rng.randint(-9, 9), rng.randint(1, 5)) for _ in range(4 * g)]
    if force_zero:
        x, y, w, z = params[-4:]
        if x == 0:
            x = Fraction(1)
            params[-4] = x
        rest = sum(params[4 * i] * params[4 * i + 3] - params[4 * i + 1] * params[4 * i + 2]
                   for i in range(g - 1))
        params[-1] = (y * w - rest) / x
    return params


@crit(5, "genus-g extension coefficient sum(x z - y w) and extendability, g in {1,2}")
@pytest.mark.parametrize("g", [1, 2])
def test_genus_extension_coefficient(g):
    rng = random.Random(500 + g)
    omega = genus_surface_ring(g)["omega"]
    zeros = 0
    for case in range(50):
        params = _genus_params(rng, g, force_zero=case % 2 == 1)
        expected = sum(params[4 * i] * params[4 * i + 3] - params[4 * i + 1] * params[4 * i + 2]
                       for i in range(g))
        d = genus_data(g, params)
        ec = extension_class(d)
        assert ec.cocycle.base.coeffs == (omega.scale(expected).coeffs if expected else {})
        ext = extend_order(d)
        assert (ext is not None) == (expected == 0) == ec.is_trivial
        zeros += expected == 0
    assert zeros >= 25


@crit(5, "genus-g extension coefficient sum(x z - y w) and extendability, g in {1,2}")
def test_genus_coefficient_symbolic_oracle():
    # eta1 * eta2 in the exterior algebra on alpha_i, beta_i, then alpha_i beta_i -> omega
    for g in (1, 2):
        names = [f"{s}{i}" for i in range(1, g + 1) for s in ("alpha", "beta")]
        syms = sympy.symbols(" ".join(f"x{i} y{i} w{i} z{i}" for i in range(1, g + 1)))
        ext = oracles.Exterior(names)
        # symbolic coefficients live outside Fraction, so expand by hand on index pairs
        total = 0
        for i in range(g):
            x, y, w, z = syms[4 * i: 4 * i + 4]
            a, b = 2 * i, 2 * i + 1
            sa, ma = ext.mono_mul((a,), (b,))
            sb, mb = ext.mono_mul((b,), (a,))
            total += x * z * sa + y * w * sb
        expected = sum(syms[4 * i] * syms[4 * i + 3] - syms[4 * i + 1] * syms[4 * i + 2]
                       for i in range(g))
        assert sympy.expand(total - expected) == 0


# -- 6 ------------------------------------------------------------------------

# Hand computation of the long exact sequence for the restricted Heisenberg
# algebroid.  H(D) = H(L^4) = <1> + <a, b> + <ac, bc> + <abc> since gamma = 0.
# The connecting map is cup with c = -2ac from H^{i-2}(L^4) to H^i(D):
#   1  -> -2ac      (nonzero class)
#   a  -> -2aac = 0
#   b  -> -2bac = 2abc   (nonzero)
#   degree >= 2 lands above the top degree 3.
# So the ranks of cup: H^0 -> H^2 is 1, H^1 -> H^3 is 1, the rest 0, and
#   H^i = coker(H^{i-2} -> H^i) + ker(H^{i-1} -> H^{i+1}):
#   H^0 = 1 + 0, H^1 = 2 + 0, H^2 = (2-1) + (2-1), H^3 = (1-1) + 2, H^4 = 0 + 1.
HAND_GYSIN = [1, 2, 2, 2, 1]


@crit(6, "Gysin dimensions (1,2,2,2,1) for the restricted Heisenberg algebroid")
def test_gysin_les():
    assert gysin_betti(heisenberg_b5()) == HAND_GYSIN


@crit(6, "Gysin dimensions (1,2,2,2,1) for the restricted Heisenberg algebroid")
def test_gysin_cone_complex():
    d = heisenberg_b5()
    assert RestrictedComplex(d).betti() == HAND_GYSIN
    ext = heis_exterior()
    c = ext.elem([(-2, "ac")])
    assert oracles.restricted_betti(ext, c, 4) == HAND_GYSIN


@crit(6, "Gysin dimensions (1,2,2,2,1) for the restricted Heisenberg algebroid")
def test_gysin_cli():
    import io
    import json
    out = io.StringIO()
    assert cli.run(["gysin", "--data", "builtin:heisenberg-b5"], out, io.StringIO()) == 0
    assert json.loads(out.getvalue())["betti"] == HAND_GYSIN


# -- 7 ------------------------------------------------------------------------

GENUS1_PARAMS = [(1, 0, 0, 1), (2, 1, 3, 5), (Fraction(1, 2), -1, 0, 3), (1, 2, 2, 4)]


@crit(7, "genus-1 symplectic data: closedness, d gamma = -c alpha_3, variation = -c")
@pytest.mark.parametrize("params", GENUS1_PARAMS)
def test_genus1_symplectic(params):
    d, form = genus_symp(params)
    m = d.model
    x, y, w, z = [Fraction(p) for p in params]
    coef = x * z - y * w
    assert symp_check_closed(form, d).passed
    gamma, top = symp_restrict(form, d)
    # gamma = alpha beta + alpha_1 eta_1 + alpha_2 eta_2 = alpha beta - u eta_1 eta_2
    assert gamma == m.parse("alpha*beta") - m.parse("u*alpha*beta").scale(coef)
    assert top.base == m["du"] and top.weight == 3
    c = extension_cocycle(d)
    assert c == m.parse("alpha*beta").scale(coef)
    assert gamma.d() == (c * top.base).scale(-1)
    var = variation(form, d)
    assert var.value.base == c.scale(-1)
    assert var.value.weight == -3
    assert var.is_trivial == (coef == 0)


# -- 8 ------------------------------------------------------------------------

P8 = "property suites: jets, module action, complexes, MC, base change, extension, E1, zero data"


@crit(8, P8)
def test_jet_group_axioms():
    rng = random.Random(801)
    for case in range(CASES):
        l = 1 + case % 2
        k = 1 + (case // 2) % 4
        f, g, h = (random_jet(rng, l, k) for _ in range(3))
        e = JetMap.identity(l, k)
        assert compose(compose(f, g), h) == compose(f, compose(g, h))
        assert compose(f, e) == f == compose(e, f)
        assert compose(f, inverse(f)) == e == compose(inverse(f), f)
        if case < 40 and k <= 3:
            # sympy oracle for the composition itself
            zs = oracles.sym_vars(l)
            zl = [zs] if l == 1 else list(zs)
            fs = [sympy.sympify(s.replace("^", "**")) for s in f.strings()]
            gs = [sympy.sympify(s.replace("^", "**")) for s in g.strings()]
            want = oracles.sym_compose(fs, gs, zl if l > 1 else zs, k)
            got = [sympy.sympify(s.replace("^", "**")) for s in compose(f, g).strings()]
            assert all(sympy.expand(a - b) == 0 for a, b in zip(want, got))


@crit(8, P8)
def test_kernel_is_abelian():
    rng = random.Random(802)
    for case in range(CASES):
        l = 1 + case % 2
        k = 1 + (case // 2) % 3
        b1, b2 = random_kernel(rng, l, k), random_kernel(rng, l, k)
        p = compose(kernel_embed(b1), kernel_embed(b2))
        assert p == compose(kernel_embed(b2), kernel_embed(b1))
        assert p == kernel_embed(b1 + b2)


@crit(8, P8)
def test_module_action_linear_part_and_scaling():
    rng = random.Random(803)
    for case in range(CASES):
        l = 1 + case % 2
        k = 1 + (case // 2) % 4
        psi = random_jet(rng, l, k)
        b = random_kernel(rng, l, k)
        lin = JetMap(l, k, [{e: c for e, c in p.items() if sum(e) == 1} for p in psi.components])
        act = module_action(psi, b)
        assert act == module_action(lin, b)
        if l == 1:
            a = psi.components[0].get((1,), Fraction(0))
            assert act == b.scale(a ** k)


@crit(8, P8)
@pytest.mark.parametrize("k", [1, 2, 3, 4, 5, 6])
def test_ce_and_universal_algebra_valid(k):
    ce = ce_algebra(k)
    assert validate(ce).passed
    s = universal_S(k).S
    rep = validate(s, max_triples=5000 if k >= 4 else 250_000)
    assert rep.passed


@crit(8, P8)
def test_ce_differential_matches_vector_field_oracle():
    # delta x_r = sum_{i<r} (i - (r-i)) x_i x_{r-i} from [e_i, e_j] = (i-j) e_{i+j}
    # and e_i <-> -z^{i+1} d/dz
    for k in range(1, 7):
        for i in range(k):
            for j in range(k):
                coef, power = oracles.vector_field_bracket(i + 1, j + 1)
                # [-z^{i+1}d, -z^{j+1}d] = (j-i) z^{i+j+1} d = -(i-j) (-z^{i+j+1} d)
                if coef == 0:
                    continue
                assert power == i + j + 1
                assert -coef == i - j


@crit(8, P8)
def test_built_complexes_square_zero_and_leibniz():
    rng = random.Random(804)
    for _ in range(CASES):
        d = random_mc(rng)
        tc = build_twisted(d)
        rep = validate(tc, max_pairs=2000, max_triples=200)
        assert rep.passed, rep


@crit(8, P8)
def test_mc_check_iff_morphism():
    rng = random.Random(805)
    passing = failing = 0
    for case in range(CASES):
        d = random_mc(rng, k_range=(2, 4))
        if case % 2:
            d = perturb(rng, d)
        ok = mc_check(d).passed
        u = universal_S(d.k) if d.k >= 1 else None
        if u is None:
            continue
        images = {0: d.gamma.scale(-1), **{i: d.eta(i) for i in range(1, d.k)}}
        if d.gamma and d.gamma.degree != 1:
            continue
        try:
            base_change(u, d.model, images)
            accepted = True
        except MaurerCartanViolation:
            accepted = False
        assert ok == accepted
        passing += ok
        failing += not ok
    assert passing >= 50 and failing >= 50


@crit(8, P8)
def test_build_twisted_equals_base_change():
    rng = random.Random(806)
    flat = 0
    for _ in range(CASES):
        d = random_mc(rng)
        tc = build_twisted(d)
        u = universal_S(d.k)
        images = {0: d.gamma.scale(-1), **{i: d.eta(i) for i in range(1, d.k)}}
        bc = base_change(u, d.model, images)
        assert tc.labels == bc.labels and tc.degrees == bc.degrees
        for p in range(tc.min_degree, tc.top_degree + 1):
            assert tc.d_matrix(p) == bc.d_matrix(p)
        if not d.gamma:
            flat += 1
            for i in range(len(tc)):
                for j in range(len(tc)):
                    assert tc.mul_basis(i, j) == bc.mul_basis(i, j)
    assert flat >= 50


@crit(8, P8)
def test_extension_class_iff_extend_feasible():
    rng = random.Random(807)
    trivial = nontrivial = 0
    for _ in range(CASES):
        d = random_mc(rng, k_range=(2, 5))
        ec = extension_class(d)
        ext = extend_order(d)
        assert ec.is_trivial == (ext is not None)
        if ext is not None:
            assert mc_check(ext.data).passed
        trivial += ec.is_trivial
        nontrivial += not ec.is_trivial
    assert trivial >= 20 and nontrivial >= 20


@crit(8, P8)
def test_e1_euler_characteristic():
    rng = random.Random(808)
    for _ in range(CASES):
        d = random_mc(rng)
        page = spectral_E1(d)
        assert page.euler_equal and page.majorizes
        tw = twisted_betti(d)
        assert sum((-1) ** n * m for n, m in enumerate(page.mass)) == \
            sum((-1) ** n * t for n, t in enumerate(tw))


@crit(8, P8)
def test_twisted_betti_matches_oracle_on_tori():
    rng = random.Random(809)
    for _ in range(CASES // 4):
        d = random_mc(rng, models=("torus2", "torus3", "heisenberg"))
        m = d.model
        names = [m.labels[b] for b in m.by_degree[1]]
        diffs = {"c": [(1, "ab")]} if m is model("heisenberg") else {}
        ext = oracles.Exterior(names, diffs)

        def conv(x):
            terms = []
            for b, c in x.coeffs.items():
                terms.append((c, [m.labels[b]]))
            return ext.elem(terms)
        etas = {i: conv(d.eta(i)) for i in range(1, d.k)}
        assert twisted_betti(d) == oracles.twisted_betti(ext, d.k, etas, conv(d.gamma))


@crit(8, P8)
def test_zero_data_twisted_betti_is_shifted_multiple():
    rng = random.Random(810)
    names = ["torus1", "torus2", "torus3", "heisenberg", "genus2"]
    for case in range(CASES):
        m = model(names[case % len(names)])
        k = rng.randint(0, 5)
        tw = twisted_betti(MaurerCartanData(k, m))
        base = m.betti()
        expected = [0] + [(k + 1) * b for b in base]
        assert tw + [0] * (len(expected) - len(tw)) == expected + [0] * (len(tw) - len(expected))


# -- 9 ------------------------------------------------------------------------

def _z2_lift_dimension_oracle():
    """Lifts f~ = 2z + p z^2, g~ = 3z + q z^2 must commute modulo z^3."""
    z, p, q = sympy.symbols("z p q")
    f = 2 * z + p * z ** 2
    g = 3 * z + q * z ** 2
    fg = oracles.truncate(f.subs(z, g), z, 2)
    gf = oracles.truncate(g.subs(z, f), z, 2)
    eqs = sympy.Poly(sympy.expand(fg - gf), z).coeffs()
    jac = sympy.Matrix([[sympy.diff(e, v) for v in (p, q)] for e in eqs])
    return 2 - jac.rank()


@crit(9, "rep_lift: Z^2 images (2z, 3z) lift with solution dimension 1; free groups lift")
def test_z2_lift_dimension():
    assert _z2_lift_dimension_oracle() == 1
    pres = GroupPresentation(["f", "g"], ["f g f^-1 g^-1"])
    rep = JetRepresentation(pres, {"f": JetMap.parse(1, 1, "2*z"), "g": JetMap.parse(1, 1, "3*z")})
    res = rep_lift(rep)
    assert res is not None
    assert res.solution_space_dim == 1
    assert rep_validate(rep, res.images).passed
    assert all(res.images[n].k == 2 for n in ("f", "g"))


@crit(9, "rep_lift: Z^2 images (2z, 3z) lift with solution dimension 1; free groups lift")
def test_free_groups_always_lift():
    rng = random.Random(901)
    for case in range(CASES // 4):
        l = 1 + case % 2
        k = 1 + (case // 2) % 3
        n = rng.randint(1, 3)
        gens = [f"g{i}" for i in range(n)]
        rep = JetRepresentation(GroupPresentation(gens, []),
                                {g: random_jet(rng, l, k) for g in gens})
        res = rep_lift(rep)
        assert res is not None
        assert res.solution_space_dim == n * kernel_dim(l, k)


@crit(9, "rep_lift: Z^2 images (2z, 3z) lift with solution dimension 1; free groups lift")
def test_relation_lift_matches_affine_probe():
    # for random commuting pairs in G_{k,1} (powers of one jet), the solution
    # dimension matches the rank of the linearized commutator equations
    rng = random.Random(902)
    for _ in range(10):
        k = rng.randint(1, 2)
        base = random_jet(rng, 1, k)
        f, g = base, compose(base, base)
        rep = JetRepresentation(GroupPresentation(["f", "g"], ["f g f^-1 g^-1"]), {"f": f, "g": g})
        res = rep_lift(rep)
        assert res is not None
        z, p, q = sympy.symbols("z p q")
        fs = sympy.sympify(f.strings()[0].replace("^", "**")) + p * z ** (k + 1)
        gs = sympy.sympify(g.strings()[0].replace("^", "**")) + q * z ** (k + 1)
        comm = oracles.truncate(fs.subs(z, gs) - gs.subs(z, fs), z, k + 1)
        eqs = [e for e in sympy.Poly(sympy.expand(comm), z).coeffs()] if comm != 0 else []
        jac = sympy.Matrix([[sympy.diff(e, v) for v in (p, q)] for e in eqs]) if eqs else sympy.zeros(0, 2)
        assert res.solution_space_dim == 2 - jac.rank()
