"""Acceptance suite: one exact check per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v`` (the summary lines are
repeated at the end of the session) or directly with
``python tests/test_acceptance.py``.
"""

import random
import sys
import time
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from divops.descent import DerivationSpec, canonical_descent, construct_rank1, verify_descent, verify_iterative
from divops.frobenius import FrobParams, build_gu, canonical_frobenius, frob_apply, recover_u, verify_homomorphism
from divops.ring import DiffOp, mul, random_element
from divops.structure import (
    KINDS,
    SubalgebraSpec,
    decompose_over_frobenius_image,
    member,
    member_direct,
    perturbation_samples,
    perturbed_table,
    reconstruct,
    rigidity_check,
    shift_identity_report,
)
from oracle import oracle_mul

RESULTS = {}


def record(number, title, ok, elapsed, budget, detail=""):
    in_time = budget is None or elapsed < budget
    passed = ok and in_time
    limit = f" (limit {budget} s)" if budget is not None else ""
    line = f"{'PASS' if passed else 'FAIL'} criterion {number}: {title} [{elapsed:.2f} s{limit}]"
    if detail:
        line += f" {detail}"
    RESULTS[number] = line
    print(line)
    return passed


def d(i, k, p, n=1):
    return DiffOp.d(i, k, p, n)


def criterion_1():
    for p in (2, 3, 5):
        for lam in range(p):
            u = FrobParams(p, 1, 1, ((d(1, 1, p) * lam, DiffOp.zero(p, 1), DiffOp.zero(p, 1)),))
            G = build_gu(u)
            if frob_apply(G, d(1, 1, p)) != d(1, p, p) + d(1, 1, p) * lam:
                return False, f"G(d) wrong at p={p}, lambda={lam}"
            expect = DiffOp(p, 1, {((0,), (p - 1 - j + (j + 1) * p,)): pow(lam, p - 1 - j, p) for j in range(p)})
            if frob_apply(G, d(1, p, p)) != expect:
                return False, f"G(d^[p]) wrong at p={p}, lambda={lam}"
    return True, "all p in {2,3,5}, all lambda"


def _grid():
    for p in (2, 3):
        for n in (1, 2):
            for s in (1, 2):
                yield p, n, s


def criterion_2():
    rng = random.Random(2)
    count = 0
    for p, n, s in _grid():
        for _ in range(13):
            u = FrobParams.random(p, n, s, 3, rng, max_terms=3)
            if recover_u(build_gu(u, depth=3)) != u:
                return False, f"round trip failed for p={p} n={n} s={s}: {u}"
            count += 1
    return True, f"{count} parameter matrices"


def criterion_3():
    rng = random.Random(3)
    count = 0
    for p, n, s in _grid():
        for u in (FrobParams.zero(p, n, s), FrobParams.random(p, n, s, 3, rng), FrobParams.random(p, n, s, 3, rng)):
            report = verify_homomorphism(build_gu(u), depth=3, samples=200, seed=count)
            if not report:
                return False, report.summary()
            count += 1
    return True, f"{count} maps, relations at depth 3 plus 200 pairs each"


def criterion_4():
    rng = random.Random(4)
    for _ in range(200):
        p = rng.choice((2, 3, 5))
        n = rng.randint(1, 2)
        a = random_element(p, n, rng, max_degree=8)
        if frob_apply(build_gu(FrobParams.zero(p, n, 1)), a) != canonical_frobenius(a, 1):
            return False, f"mismatch on {a}"
    return True, "200 elements"


def criterion_5():
    for p in (2, 3):
        for n in (1, 2):
            desc = canonical_descent(p, n, 3)
            report = verify_iterative(desc)
            report.merge(verify_descent(desc, DerivationSpec(n), full=True))
            if not report:
                return False, report.summary()
    return True, "all alpha, beta <= p^3 - 1, p in {2,3}, n <= 2"


def _admissible_seeds(p, depth, rng):
    seeds = []
    for k in range(depth):
        terms = {((0,), (p**k,)): 1}
        for j in range(1, p**k):
            if rng.random() < 0.5:
                terms[((0,), (j,))] = rng.randint(1, p - 1)
        seeds.append(DiffOp(p, 1, terms))
    return seeds


def criterion_6():
    rng = random.Random(6)
    rejected = 0
    for p in (2, 3):
        for n in (1, 2):
            if not rigidity_check(perturbed_table(p, n, 3, 0, 0, DiffOp.zero(p, n))):
                return False, f"canonical table rejected at p={p}, n={n}"
            for i, k, e in perturbation_samples(p, n, 3, 250, rng):
                if rigidity_check(perturbed_table(p, n, 3, i, k, e)):
                    return False, f"accepted perturbation p={p} n={n} axis={i + 1} level={k}: {e}"
                rejected += 1
    for t in range(20):
        p = (2, 3)[t % 2]
        got = construct_rank1(DerivationSpec(1), _admissible_seeds(p, 3, rng))
        if got != canonical_descent(p, 1, 3):
            return False, f"seed set {t} gave {got.gens}"
    return True, f"{rejected} perturbations rejected, 20 seed sets canonical"


def criterion_7():
    rng = random.Random(7)
    p = 2
    for t in range(200):
        n = 1 + t % 2
        G = build_gu(FrobParams.zero(p, n, 1))
        a = random_element(p, n, rng, max_degree=10)
        coeffs = decompose_over_frobenius_image(G, a)
        expect = {(al, be) for al in _cube(p, n) for be in _cube(p, n)}
        if set(coeffs) != expect or len(coeffs) != p ** (2 * n):
            return False, f"basis keys wrong for {a}"
        if reconstruct(G, coeffs) != a:
            return False, f"reconstruction failed for {a}"
    return True, "200 elements, p^(2n) basis elements each"


def _cube(p, n):
    from itertools import product

    return list(product(range(p), repeat=n))


def _spec(kind, p, n, rng):
    axis = rng.randint(1, n) if kind in ("a1", "a3", "a5", "b1", "b3") else None
    level = rng.randint(1 if kind == "a8" else 0, 2) if kind in ("a1", "a5", "a8", "b1") else None
    levels = tuple(rng.randint(0, 2) for _ in range(n)) if kind in ("a2", "a6", "b2") else None
    return SubalgebraSpec(kind, p, n, axis, level, levels)


def _sample(kind, spec, rng):
    p, n = spec.p, spec.n
    a = random_element(p, n, rng, max_terms=3, max_degree=10)
    if kind.startswith("b") and rng.random() < 0.7:
        a = DiffOp(p, n, {(al, (0,) * n): c for (al, _), c in a.items()})
    if rng.random() < 0.4:
        # keep only terms of the closed form so members are well represented
        a = DiffOp(p, n, {t: c for t, c in a.items() if spec.term_ok(*t)})
    return a


def membership_disagreements(per_statement=1000, seed=8):
    """Per statement: (pattern-only, direct-only) counts and a first witness."""
    rng = random.Random(seed)
    out = {}
    for kind in sorted(KINDS):
        pattern_only = direct_only = 0
        witness = None
        for _ in range(per_statement):
            spec = _spec(kind, rng.choice((2, 3)), rng.randint(1, 2), rng)
            a = _sample(kind, spec, rng)
            m, dm = member(spec, a), member_direct(spec, a)
            if m and not dm:
                pattern_only += 1
            if dm and not m:
                direct_only += 1
            if m != dm and witness is None:
                witness = (spec, str(a))
        out[kind] = (pattern_only, direct_only, witness)
    return out


def criterion_8():
    found = membership_disagreements()
    for p in (2, 3):
        for k in range(3):
            if not shift_identity_report(p, k, p**4):
                return False, f"shift identity fails at p={p}, k={k}"
    bad = {k: v for k, v in found.items() if v[0] or v[1]}
    if bad:
        parts = []
        for kind, (po, do, (spec, a)) in sorted(bad.items()):
            parts.append(f"{kind}: {do} kernel elements outside the closed form, {po} the other way, e.g. {a} for {spec}")
        return False, "; ".join(parts)
    return True, "12 statements x 1000 elements, shift identity for j < p^4"


def criterion_9():
    rng = random.Random(9)
    for t in range(1000):
        p = (2, 3, 5)[t % 3]
        n = rng.randint(1, 2)
        a = random_element(p, n, rng, max_degree=12)
        b = random_element(p, n, rng, max_degree=12)
        if mul(a, b) != oracle_mul(a, b):
            return False, f"mismatch on ({a}) * ({b})"
    return True, "1000 pairs"


CRITERIA = [
    (1, "golden vectors for u = (lambda d, 0, 0)", criterion_1, 1),
    (2, "recover_u inverts build_gu", criterion_2, 30),
    (3, "G_u is a homomorphism", criterion_3, 60),
    (4, "G_0 is the canonical Frobenius", criterion_4, None),
    (5, "canonical descent axioms", criterion_5, 30),
    (6, "rigidity and rank-one uniqueness", criterion_6, 60),
    (7, "free module of rank p^(2n)", criterion_7, 30),
    (8, "two-sided membership cross-validation and shift identity", criterion_8, 120),
    (9, "mul agrees with the action oracle", criterion_9, 60),
]


def run_criterion(number):
    _, title, fn, budget = CRITERIA[number - 1]
    start = time.perf_counter()
    ok, detail = fn()
    return record(number, title, ok, time.perf_counter() - start, budget, detail)


@pytest.mark.parametrize("number", [c[0] for c in CRITERIA if c[0] != 8])
def test_criterion(number):
    assert run_criterion(number), RESULTS[number]


@pytest.mark.xfail(
    strict=True,
    reason="closed forms for ker ad(d_i^[p^k]) with k >= 1 and for the centralizer of F_x^k "
    "are strictly smaller than the kernels (x d is a counterexample); see the decisions ledger",
)
def test_criterion_8():
    assert run_criterion(8), RESULTS[8]


def test_criterion_8_proven_parts():
    """What does hold: closed form inside the kernel everywhere, equality where exact."""
    rng = random.Random(80)
    for kind in sorted(KINDS):
        for _ in range(300):
            spec = _spec(kind, rng.choice((2, 3)), rng.randint(1, 2), rng)
            a = _sample(kind, spec, rng)
            m, dm = member(spec, a), member_direct(spec, a)
            assert dm or not m, (spec, str(a))
            if spec.exact:
                assert m == dm, (spec, str(a))
    for p in (2, 3):
        for k in range(3):
            assert shift_identity_report(p, k, p**4)


if __name__ == "__main__":
    status = 0
    for number, *_ in CRITERIA:
        status |= not run_criterion(number)
    sys.exit(status)
