import random

import pytest

from divops.descent import (
    Descent,
    DescentError,
    DerivationSpec,
    MultiSequence,
    canonical_descent,
    check_delta_axiom,
    classify,
    construct_rank1,
    normalize,
    perturb,
    product,
    verify_descent,
    verify_iterative,
)
from divops.frobenius import FrobParams, build_gu
from divops.ring import DiffOp, DRing, ShapeError
from oracle import oracle_mul, oracle_power


def random_seeds(p, depth, rng):
    """y_k = d^[p^k] + lower divided powers: admissible seeds over D_1 for -ad x."""
    seeds = []
    for k in range(depth):
        terms = {((0,), (p**k,)): 1}
        for j in range(1, p**k):
            if rng.random() < 0.5:
                terms[((0,), (j,))] = rng.randint(1, p - 1)
        seeds.append(DiffOp(p, 1, terms))
    return seeds


def test_expand_canonical():
    for p in (2, 3):
        for n in (1, 2):
            desc = canonical_descent(p, n, 2)
            for alpha in desc.indices():
                assert desc.expand(alpha) == DiffOp.d_multi(alpha, p)
            assert desc.expand((0,) * n) == 1


def test_expand_small_example():
    R = DRing(2)
    desc = Descent(2, 1, [[R.d(), R.d(1, 2)]])
    assert desc.expand((3,)) == R.d(1, 3)
    assert desc.expand((3,)) == oracle_mul(R.d(), R.d(1, 2))
    with pytest.raises(DescentError):
        desc.expand((4,))


def test_verify_iterative_examples():
    R = DRing(2)
    assert verify_iterative(canonical_descent(2, 1, 3))
    bad = verify_iterative(Descent(2, 1, [[R.d() + R.x(), R.d(1, 2)]]))
    assert not bad
    assert any(f.check == "nilpotent" for f in bad.failures)
    assert oracle_power(R.d() + R.x(), 2) == 1 + R.x(1, 2)
    bad = verify_iterative(Descent(2, 1, [[R.d() + 1]]))
    assert not bad
    assert oracle_power(R.d() + 1, 2) == 1


def test_verify_descent_examples():
    for p in (2, 3):
        assert verify_descent(canonical_descent(p, 2, 2), DerivationSpec(2))
    # generators of G_u form a descent for -ad(x^p)
    rng = random.Random(7)
    for p in (2, 3):
        for n in (1, 2):
            u = FrobParams.random(p, n, 1, 3, rng)
            G = build_gu(u)
            desc = Descent(p, n, G.generators(3), s=1)
            assert verify_descent(desc, DerivationSpec(n, 1))
            assert verify_descent(desc.truncate((2,) * n), DerivationSpec(n, 1), full=True)
    # level mismatch
    report = verify_descent(canonical_descent(2, 1, 3, s=1), DerivationSpec(1, 2))
    assert not report


def test_construct_rank1_examples():
    R = DRing(2)
    delta = DerivationSpec(1)
    assert construct_rank1(delta, [R.d(), R.d(1, 2)]).gens == ((R.d(), R.d(1, 2)),)
    assert construct_rank1(delta, [R.d(), R.d(1, 2) + R.d()]).gens == ((R.d(), R.d(1, 2)),)
    for p in (2, 3):
        S = DRing(p)
        got = construct_rank1(DerivationSpec(1, 1), [S.d(1, p), S.d(1, p * p)])
        assert got.gens == ((S.d(1, p), S.d(1, p * p)),)


def test_construct_rank1_rejects_bad_seeds():
    R = DRing(2)
    delta = DerivationSpec(1)
    with pytest.raises(DescentError):
        construct_rank1(delta, [R.d() + R.x()])
    with pytest.raises(DescentError):
        construct_rank1(delta, [R.d() + 1])
    with pytest.raises(DescentError):
        construct_rank1(delta, [R.d(1, 2)])


@pytest.mark.parametrize("p", (2, 3))
def test_construct_rank1_uniqueness_and_validity(p):
    rng = random.Random(p)
    canonical = canonical_descent(p, 1, 3)
    for _ in range(10):
        desc = construct_rank1(DerivationSpec(1), random_seeds(p, 3, rng))
        assert desc == canonical
        assert verify_descent(desc, DerivationSpec(1))
        assert verify_iterative(desc)


def test_product_examples():
    p = 3
    a = Descent(p, 2, [[DiffOp.d(1, 1, p, 2), DiffOp.d(1, 3, p, 2)], []])
    b = Descent(p, 2, [[], [DiffOp.d(2, 1, p, 2), DiffOp.d(2, 3, p, 2)]])
    assert product([a, b]) == canonical_descent(p, 2, 2)
    single = canonical_descent(p, 1, 2)
    assert product([single]) is single
    with pytest.raises(DescentError):
        product([a, a])
    rng = random.Random(3)
    for p in (2, 3):
        u = FrobParams.random(p, 2, 1, 2, rng, separated=True)
        G = build_gu(u)
        gens = G.generators(2)
        a = Descent(p, 2, [gens[0], []], s=1)
        b = Descent(p, 2, [[], gens[1]], s=1)
        assert verify_descent(product([a, b]), DerivationSpec(2, 1))


def test_perturb_examples():
    R = DRing(2)
    ref = canonical_descent(2, 1, 2)
    assert perturb(ref, {}) == ref.sequence()
    seq = perturb(ref, {(1,): R.one()})
    for i in range(1, 4):
        assert seq[(i,)] == R.d(1, i) + R.d(1, i - 1)
    assert check_delta_axiom(seq, DerivationSpec(1))
    report = verify_iterative(seq)
    assert not report
    assert any(f.where[:2] == ((1,), (1,)) for f in report.failures)
    # polynomial lambdas are constants for -ad x
    seq = perturb(ref, {(1,): R.x(1, 3) + 1})
    assert check_delta_axiom(seq, DerivationSpec(1))
    with pytest.raises(DescentError):
        perturb(ref, {(1,): R.d()})


def test_normalize_examples():
    R = DRing(2)
    delta = DerivationSpec(1)
    ref = canonical_descent(2, 1, 2)
    assert normalize(delta, ref, ref) == ref.sequence()
    raw = Descent(2, 1, [[R.d() + 1]])
    out = normalize(delta, canonical_descent(2, 1, 1), raw)
    assert out[(1,)] == R.d()
    for p in (2, 3):
        for n in (1, 2):
            ref = canonical_descent(p, n, 2 if n == 1 else 1)
            S = DRing(p, n)
            lam = {tuple(1 if j == i else 0 for j in range(n)): S.x(1, 2) + 1 for i in range(n)}
            lam[(2,) + (0,) * (n - 1)] = S.x(n) * 2
            seq = perturb(ref, lam)
            once = normalize(DerivationSpec(n), ref, seq)
            assert once == ref.sequence()
            assert normalize(DerivationSpec(n), ref, once) == once


def test_classify_examples():
    for p in (2, 3):
        ref = canonical_descent(p, 1, 3, s=1)
        delta = DerivationSpec(1, 1)
        assert classify(delta, ref, ref).is_zero()
        seen = {}
        for lam in range(p):
            u = FrobParams(p, 1, 1, ((DiffOp.d(1, 1, p, 1) * lam,),))
            cand = Descent(p, 1, build_gu(u).generators(3), s=1)
            params = classify(delta, ref, cand)
            assert params.params[0][0] == DiffOp.d(1, 1, p, 1) * lam
            assert all(not c for c in params.params[0][1:])
            assert params.reference.startswith("canonical")
            seen[params.params] = lam
        assert len(seen) == p


def test_classify_injective_on_sampled_parameters():
    rng = random.Random(11)
    for p in (2, 3):
        ref = canonical_descent(p, 2, 2, s=1)
        delta = DerivationSpec(2, 1)
        found = {}
        for _ in range(8):
            u = FrobParams.random(p, 2, 1, 2, rng)
            cand = Descent(p, 2, build_gu(u).generators(2), s=1)
            params = classify(delta, ref, cand).params
            if params in found:
                assert found[params] == u
            found[params] = u


def test_multisequence_requires_unit():
    with pytest.raises(DescentError):
        MultiSequence(2, 1, (2,), {(0,): DiffOp.zero(2, 1), (1,): DiffOp.d(1, 1, 2, 1)})


def test_shape_errors():
    with pytest.raises(ShapeError):
        Descent(2, 2, [[DiffOp.d(1, 1, 2, 2)]])
    with pytest.raises(ShapeError):
        verify_descent(canonical_descent(2, 1, 1), DerivationSpec(2))
