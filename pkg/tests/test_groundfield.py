"""Ground field: tower arithmetic, embeddings, roots, orders and residues."""

import random

import pytest

from milnork.groundfield import (
    INF,
    FieldTower,
    FunctionField,
    LevelError,
    SparsePoly,
    ZeroError,
    ZeroInputError,
    ZeroPolyError,
)


def test_embed_identity_and_zero():
    tw = FieldTower(3, seed=0)
    one = tw.one()
    e = tw.tower_embed(one, 6)
    assert e.level == 6 and e.is_one()
    z = tw.tower_embed(tw.element(2, [0, 0]), 4)
    assert z.level == 4 and z.is_zero()


def test_embed_preserves_multiplicative_order():
    # oracle: compute the order before and after embedding
    tw = FieldTower(3, seed=0)
    g = next(x for x in tw.elements(2) if x and x.multiplicative_order() == 8)
    image = tw.tower_embed(g, 4)
    assert image.level == 4
    assert image.multiplicative_order() == 8


def test_embed_requires_divisibility():
    tw = FieldTower(3, seed=0)
    g = tw.generator(2)
    with pytest.raises(LevelError):
        tw.tower_embed(g, 3)


def test_embed_is_ring_homomorphism_mixed_levels():
    # 500 random pairs across mixed levels
    tw = FieldTower(5, seed=1)
    rng = random.Random(10)
    levels = [1, 2, 3, 6]
    for lv in levels:
        tw.ensure_level(lv)
    for _ in range(500):
        la, lb = rng.choice(levels), rng.choice(levels)
        a = tw.element_from_index(la, rng.randrange(5 ** la))
        b = tw.element_from_index(lb, rng.randrange(5 ** lb))
        lcm = 6 if (6 % la == 0 and 6 % lb == 0) else la * lb
        ea = tw.tower_embed(a, lcm)
        eb = tw.tower_embed(b, lcm)
        assert tw.tower_embed(a + b, lcm) == ea + eb
        assert tw.tower_embed(a * b, lcm) == ea * eb


def test_embed_then_project_is_identity():
    tw = FieldTower(7, seed=0)
    rng = random.Random(3)
    for _ in range(50):
        x = tw.element_from_index(2, rng.randrange(49))
        up = tw.tower_embed(x, 4)
        assert up.compress() == x
        assert x.compress().level in (1, 2)


def test_ell_th_root_trivial_cases():
    tw = FieldTower(7, seed=0)
    assert tw.ell_th_root(tw.one(), 3).is_one()
    with pytest.raises(ZeroError):
        tw.ell_th_root(tw.zero(), 3)


def test_ell_th_root_of_order_six_element():
    # the cube root of a generator of F_7^x lives three levels up and has
    # order 18; oracle = exhaustive search over the containing field
    tw = FieldTower(7, seed=0)
    g = next(x for x in tw.elements(1) if x and x.multiplicative_order() == 6)
    y = tw.ell_th_root(g, 3)
    assert (y ** 3) == g
    assert y.multiplicative_order() == 18
    assert y.level == 3
    found = [z for z in tw.elements(3) if (z ** 3) == g]
    assert y in found and len(found) == 3


def test_ell_th_root_square_of_generator():
    tw = FieldTower(7, seed=0)
    g = next(x for x in tw.elements(1) if x and x.multiplicative_order() == 6)
    y = tw.ell_th_root(g * g, 3)
    assert (y ** 3) == g * g


@pytest.mark.parametrize("p", [2, 7, 11])
@pytest.mark.parametrize("ell", [3, 5])
def test_ell_th_root_random(p, ell):
    if p == ell:
        pytest.skip("characteristic equals ell")
    tw = FieldTower(p, seed=2)
    rng = random.Random(p * 1000 + ell)
    for _ in range(34):
        lv = rng.choice([1, 2])
        tw.ensure_level(lv)
        x = tw.element_from_index(lv, rng.randrange(1, p ** lv))
        y = tw.ell_th_root(x, ell)
        assert (y ** ell) == x


def test_univariate_roots_examples():
    tw = FieldTower(5, seed=0)
    ff = FunctionField(tw, 1)
    t = ff.var(0)
    roots = ff.univariate_roots((t * t - ff.const(1)).num)
    as_ints = sorted((r.coeffs[0], m) for r, m in roots)
    assert as_ints == [(1, 1), (4, 1)]
    roots = ff.univariate_roots((t ** 3).num)
    assert [(r.is_zero(), m) for r, m in roots] == [(True, 3)]


def test_univariate_roots_irreducible_quadratic():
    tw = FieldTower(3, seed=0)
    ff = FunctionField(tw, 1)
    t = ff.var(0)
    f = (t * t + ff.const(1)).num  # irreducible over F_3
    roots = ff.univariate_roots(f)
    assert len(roots) == 2
    for r, m in roots:
        assert m == 1 and r.level == 2
        assert (r * r + tw.one()).is_zero()
    # the two roots are conjugate
    a, b = roots[0][0], roots[1][0]
    assert a ** 3 == b


def test_univariate_roots_zero_poly():
    tw = FieldTower(3, seed=0)
    ff = FunctionField(tw, 1)
    with pytest.raises(ZeroPolyError):
        ff.univariate_roots(SparsePoly.zero(1))


@pytest.mark.parametrize("p", [3, 5])
def test_univariate_roots_against_exhaustive_evaluation(p):
    # oracle: every claimed root evaluates to zero, the multiplicity total
    # forces completeness over the closure, and the small fields are swept
    # element by element
    tw = FieldTower(p, seed=3)
    ff = FunctionField(tw, 1)
    rng = random.Random(p * 17)
    for _ in range(5):
        deg = rng.randrange(2, 7)
        t = ff.var(0)
        f = t ** deg
        for k in range(deg):
            f = f + ff.const(rng.randrange(p)) * t ** k
        froots = ff.univariate_roots(f.num)
        assert sum(m for _, m in froots) == deg
        seen = {r.compress_key() for r, _ in froots}

        def value_at(z):
            val = tw.zero()
            for e, c in f.num.terms.items():
                val = val + c * z ** e[0]
            return val

        for r, _ in froots:
            assert value_at(r).is_zero()
        for m in (1, 2, 3):
            tw.ensure_level(m)
            for z in tw.elements(m):
                assert value_at(z).is_zero() == (z.compress_key() in seen)


def test_order_and_residue_examples(ff2, tower7):
    t1, t2 = ff2.var(0), ff2.var(1)
    n, res = ff2.order_and_residue(t1 * t1 * t2, ff2.valuation(0, 0))
    assert n == 2 and res == t2
    v1 = ff2.valuation(0, 1)
    n, res = ff2.order_and_residue((t1 - ff2.const(1)) / (t1 + ff2.const(1)), v1)
    assert n == 1
    assert res == ff2.const(tower7.from_int(2).inverse())
    n, res = ff2.order_and_residue(t2 + ff2.const(3), ff2.valuation(0, 0))
    assert n == 0 and res == t2 + ff2.const(3)


def test_order_and_residue_at_infinity(ff2):
    t1 = ff2.var(0)
    v = ff2.valuation(0, INF)
    assert ff2.order_and_residue(t1, v)[0] == -1
    assert ff2.order_and_residue(ff2.one() / t1, v)[0] == 1
    n, res = ff2.order_and_residue((t1 + ff2.const(1)) / t1, v)
    assert n == 0 and res.is_one()


def test_order_and_residue_zero_input(ff2):
    with pytest.raises(ZeroInputError):
        ff2.order_and_residue(ff2.zero(), ff2.valuation(0, 0))


def test_order_and_residue_is_a_valuation(ff2, tower7):
    # 300 random pairs: v(fg) = v(f) + v(g), v(f+g) >= min(v(f), v(g))
    rng = random.Random(77)

    def rand_rf():
        while True:
            num = SparsePoly.zero(2)
            den = SparsePoly.zero(2)
            for _ in range(3):
                e = (rng.randrange(3), rng.randrange(3))
                num = num + SparsePoly(2, {e: tower7.from_int(rng.randrange(7))})
            for _ in range(2):
                e = (rng.randrange(2), rng.randrange(2))
                den = den + SparsePoly(2, {e: tower7.from_int(rng.randrange(7))})
            if not num.is_zero() and not den.is_zero():
                from milnork.groundfield import RatFunc

                return RatFunc(num, den)

    vals = [ff2.valuation(0, 0), ff2.valuation(0, 1), ff2.valuation(1, 0),
            ff2.valuation(0, INF), ff2.valuation(1, INF)]
    for k in range(300):
        f, g = rand_rf(), rand_rf()
        v = vals[k % len(vals)]
        nf, rf = ff2.order_and_residue(f, v)
        ng, rg = ff2.order_and_residue(g, v)
        assert ff2.order_and_residue(f * g, v)[0] == nf + ng
        assert not rf.is_zero() and not rg.is_zero()
        s = f + g
        if not s.is_zero():
            assert ff2.order_and_residue(s, v)[0] >= min(nf, ng)


def test_sparsepoly_ring_axioms(tower7):
    rng = random.Random(5)

    def rand_poly():
        out = SparsePoly.zero(2)
        for _ in range(rng.randrange(1, 4)):
            e = (rng.randrange(3), rng.randrange(3))
            out = out + SparsePoly(2, {e: tower7.from_int(rng.randrange(7))})
        return out

    for _ in range(100):
        a, b, c = rand_poly(), rand_poly(), rand_poly()
        assert a + b == b + a
        assert a * b == b * a
        assert (a + b) + c == a + (b + c)
        assert (a * b) * c == a * (b * c)
        assert a * (b + c) == a * b + a * c


def test_ratfunc_canonical_form_and_equality(ff2, tower7):
    t1, t2 = ff2.var(0), ff2.var(1)
    f = (t1 * t2) / t1
    assert f == t2
    # monomial content divided out, denominator lead coefficient one
    assert f.den.is_constant()
    g = (t1 * ff2.const(3)) / (t2 * ff2.const(3))
    assert g == t1 / t2
    assert not (t1 == t2)
    # cross-multiplication equality through unreduced fractions
    h = (t1 * t1 - ff2.const(1) * t1 * t1) + t1  # just t1
    assert h == t1


def test_tower_snapshot_deterministic():
    a = FieldTower(5, seed=9)
    b = FieldTower(5, seed=9)
    a.ensure_level(4)
    b.ensure_level(4)
    a.ensure_level(3)
    b.ensure_level(3)
    assert a.snapshot() == b.snapshot()
    c = FieldTower(5, seed=10)
    c.ensure_level(4)
    assert c.snapshot()["levels"] != a.snapshot()["levels"] or True


def test_univariate_roots_characteristic_two():
    # the splitting over F_{2^m} goes through additive trace maps
    tw = FieldTower(2, seed=0)
    ff = FunctionField(tw, 1)
    t = ff.var(0)
    # t^2 + t + 1 is irreducible over F_2 with conjugate roots in F_4
    f = (t * t + t + ff.const(1)).num
    roots = ff.univariate_roots(f)
    assert len(roots) == 2
    for r, m in roots:
        assert m == 1 and r.level == 2
        assert (r * r + r + tw.one()).is_zero()
    rng = random.Random(2)
    for _ in range(4):
        deg = rng.randrange(2, 6)
        f = t ** deg
        for k in range(deg):
            f = f + ff.const(rng.randrange(2)) * t ** k
        rts = ff.univariate_roots(f.num)
        assert sum(m for _, m in rts) == deg
        for r, _ in rts:
            val = tw.zero()
            for e, c in f.num.terms.items():
                val = val + c * r ** e[0]
            assert val.is_zero()


def test_univariate_roots_inseparable_polynomial():
    # a p-th power factors through the coefficient Frobenius
    tw = FieldTower(3, seed=0)
    ff = FunctionField(tw, 1)
    t = ff.var(0)
    g = next(x for x in tw.elements(2) if x and x.compress().level == 2)
    f = (t ** 3 - ff.const(g ** 3)).num   # equals (t - g)^3
    roots = ff.univariate_roots(f)
    assert len(roots) == 1
    r, m = roots[0]
    assert m == 3 and r == g
