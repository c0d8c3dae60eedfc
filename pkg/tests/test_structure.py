import random

import pytest

from divops.frobenius import FrobParams, build_gu
from divops.ring import DiffOp, DRing, ShapeError, mul, random_element
from divops.structure import (
    KINDS,
    StructureError,
    SubalgebraSpec,
    basis_upto,
    check_polynomial_kernel,
    decompose_over_frobenius_image,
    member,
    member_direct,
    nil_degree,
    perturbation_samples,
    perturbed_table,
    reconstruct,
    rigidity_check,
    shift_identity_report,
)
from oracle import oracle_commutator, oracle_mul, oracle_power


def spec_for(kind, p, n, rng=None):
    rng = rng or random.Random(0)
    axis = rng.randint(1, n) if kind in ("a1", "a3", "a5", "b1", "b3") else None
    level = None
    if kind in ("a1", "a5", "b1"):
        level = rng.randint(0, 2)
    if kind == "a8":
        level = rng.randint(1, 2)
    levels = tuple(rng.randint(0, 2) for _ in range(n)) if kind in ("a2", "a6", "b2") else None
    return SubalgebraSpec(kind, p, n, axis, level, levels)


def test_member_examples():
    R = DRing(2, 2)
    a7 = SubalgebraSpec("a7", 2, 2)
    assert member(a7, R.x(1, 2) + R.x(1) * R.x(2))
    assert not member(a7, R.x(1) * R.d(1))
    S = DRing(2)
    a8 = SubalgebraSpec("a8", 2, 1, level=1)
    assert member(a8, S.d())
    assert not member(a8, S.d(1, 2))
    a5 = SubalgebraSpec("a5", 2, 1, axis=1, level=1)
    assert member(a5, S.d())
    assert not member(a5, S.d(1, 2))
    assert oracle_commutator(S.d(1, 2), S.x(1, 2)) == 1


def test_basis_examples():
    assert [str(b) for b in basis_upto(SubalgebraSpec("a7", 3, 1), 1)] == ["1", "x1"]
    assert [str(b) for b in basis_upto(SubalgebraSpec("a8", 2, 1, level=1), 6)] == ["1", "d1[1]"]
    assert [str(b) for b in basis_upto(SubalgebraSpec("b2", 2, 1, levels=(0,)), 2)] == ["1", "x1^2"]


def test_polynomial_kernel_is_digit_pattern():
    # d^[2] kills x at p = 2 although x is not a polynomial in x^4
    R = DRing(2)
    b1 = SubalgebraSpec("b1", 2, 1, axis=1, level=1)
    assert member(b1, R.x())
    assert member_direct(b1, R.x())
    assert not member(b1, R.x(1, 2))
    assert [str(b) for b in basis_upto(b1, 5)] == ["1", "x1", "x1^4", "x1^5"]


def test_nil_degree_examples():
    R = DRing(3, 2)
    assert nil_degree(R.x(1, 5)) == (0, 0)
    assert nil_degree(R.x(1) * R.dm((2, 1))) == (2, 1)
    assert nil_degree(DRing(3).d(1, 3) + DRing(3).d()) == (3,)
    with pytest.raises(StructureError):
        nil_degree(R.zero())


@pytest.mark.parametrize("kind", sorted(KINDS))
def test_basis_elements_are_members(kind):
    for p in (2, 3):
        for n in (1, 2):
            spec = spec_for(kind, p, n, random.Random(hash((kind, p, n)) % 1000))
            basis = basis_upto(spec, 6)
            assert basis
            for b in basis:
                assert member(spec, b)
                assert member_direct(spec, b)


@pytest.mark.parametrize("kind", sorted(KINDS))
def test_pattern_and_direct_agree(kind):
    rng = random.Random(kind)
    for p in (2, 3):
        for n in (1, 2):
            for _ in range(60):
                spec = spec_for(kind, p, n, rng)
                a = random_element(p, n, rng, max_terms=3, max_degree=10)
                if kind.startswith("b") and rng.random() < 0.7:
                    a = DiffOp(p, n, {(al, (0,) * n): c for (al, _), c in a.items()})
                direct = member_direct(spec, a)
                if member(spec, a):
                    assert direct, (spec, str(a))
                if spec.exact:
                    assert member(spec, a) == direct, (spec, str(a))


def test_inexact_closed_forms():
    # the Euler operator x d centralizes F_x^k(D(P_1)) and d^[p^k], k >= 1
    for p in (2, 3):
        R = DRing(p)
        euler = R.x() * R.d()
        for k in (1, 2):
            assert oracle_commutator(R.x(1, p**k), euler) == 0
            for spec in (SubalgebraSpec("a8", p, 1, level=k), SubalgebraSpec("a1", p, 1, axis=1, level=k)):
                assert not spec.exact
                assert member_direct(spec, euler)
                assert not member(spec, euler)
        assert oracle_commutator(R.d(1, p), euler) == 0
    # neither term of x + x^2 d commutes with d^[2], their sum does
    R = DRing(2)
    a1 = SubalgebraSpec("a1", 2, 1, axis=1, level=1)
    a = R.x() + R.x(1, 2) * R.d()
    assert oracle_commutator(R.d(1, 2), a) == 0
    assert member_direct(a1, a)
    assert not member_direct(a1, R.x()) and not member_direct(a1, R.x(1, 2) * R.d())
    assert oracle_commutator(R.d(1, 4), R.x() * R.d(1, 3)) == 0
    assert SubalgebraSpec("a1", 2, 1, axis=1, level=0).exact
    assert SubalgebraSpec("a2", 2, 2, levels=(0, 0)).exact
    assert not SubalgebraSpec("a2", 2, 2, levels=(0, 1)).exact


def test_shift_identity():
    for p in (2, 3):
        for k in range(3):
            assert shift_identity_report(p, k, p**4)


def test_polynomial_kernel_report():
    for p in (2, 3):
        for n in (1, 2):
            assert check_polynomial_kernel(p, n, 4)


def test_decompose_examples():
    G = build_gu(FrobParams.zero(2, 1, 1))
    R = DRing(2)
    a = R.x(1, 3) * R.d(1, 5)
    c = decompose_over_frobenius_image(G, a)
    assert c[((1,), (1,))] == R.x() * R.d(1, 2)
    assert all(not v for k, v in c.items() if k != ((1,), (1,)))
    assert oracle_mul(R.x(1, 2) * R.d(1, 4), R.x() * R.d()) == a
    assert decompose_over_frobenius_image(G, R.one())[((0,), (0,))] == 1
    for p in (2, 3):
        for n in (1, 2):
            H = build_gu(FrobParams.zero(p, n, 1))
            for key in decompose_over_frobenius_image(H, DiffOp.one(p, n)):
                basis = DiffOp(p, n, {key: 1})
                coeffs = decompose_over_frobenius_image(H, basis)
                assert len(coeffs) == p ** (2 * n)
                assert coeffs[key] == 1
                assert all(not v for k, v in coeffs.items() if k != key)


@pytest.mark.parametrize("side", ("left", "right"))
def test_decompose_reconstructs(side):
    rng = random.Random(side)
    for p in (2, 3):
        for n in (1, 2):
            for u in (FrobParams.zero(p, n, 1), FrobParams.random(p, n, 1, 3, rng)):
                G = build_gu(u)
                for _ in range(15):
                    a = random_element(p, n, rng, max_degree=10)
                    coeffs = decompose_over_frobenius_image(G, a, side)
                    assert len(coeffs) == p ** (2 * n)
                    assert reconstruct(G, coeffs, side) == a


def test_decompose_requires_level_one():
    with pytest.raises(StructureError):
        decompose_over_frobenius_image(build_gu(FrobParams.zero(2, 1, 2)), DiffOp.one(2, 1))


def test_rigidity_examples():
    R = DRing(2)
    assert rigidity_check([[R.d(), R.d(1, 2), R.d(1, 4)]])
    report = rigidity_check([[R.d() + R.x(), R.d(1, 2)]])
    assert not report
    assert any(f.check == "nilpotent" for f in report.failures)
    assert oracle_power(R.d() + R.x(), 2) == 1 + R.x(1, 2)
    report = rigidity_check([[R.d(), R.d(1, 2) + R.x(1, 2)]])
    assert not report
    assert [f.check for f in report.failures] == ["nilpotent"]
    assert oracle_power(R.d(1, 2) + R.x(1, 2), 2)


def test_rigidity_rejects_sampled_perturbations():
    rng = random.Random(1)
    for p in (2, 3):
        for n in (1, 2):
            assert rigidity_check(perturbed_table(p, n, 2, 0, 0, DiffOp.zero(p, n)))
            for i, k, e in perturbation_samples(p, n, 2, 40, rng):
                report = rigidity_check(perturbed_table(p, n, 2, i, k, e))
                assert not report
                assert all(f.check not in ("uniqueness", "internal") for f in report.failures)


def test_shape_checks():
    with pytest.raises(ShapeError):
        member(SubalgebraSpec("a7", 2, 2), DiffOp.one(2, 1))
    with pytest.raises(StructureError):
        SubalgebraSpec("a1", 2, 1)
    with pytest.raises(StructureError):
        SubalgebraSpec("a8", 2, 1, level=0)
    with pytest.raises(StructureError):
        SubalgebraSpec("zz", 2, 1)
    with pytest.raises(StructureError):
        basis_upto(SubalgebraSpec("a7", 2, 1), -1)
