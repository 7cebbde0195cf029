"""Tests for exact cyclotomic arithmetic, Gauss sums, and the twist identity."""
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stratgrid.characters import (
    ConductorTooLarge,
    CoeffFamily,
    CyclotomicInt,
    FieldChar,
    GF,
    InconsistentSeed,
    TrivialCharacter,
    TwistSeed,
    UnitChar,
    UnitGroup,
    all_field_chars,
    all_unit_chars,
    build_companion_coeffs,
    conductor,
    cyclotomic_poly,
    gauss_sum,
    random_twist_seed,
    twisted_sum,
    unit_twisted_sum,
    verify_twist_identity,
)

GAUSS_ORDERS = (3, 4, 5, 7, 8, 9, 11, 13)


def euler_phi(m: int) -> int:
    return sum(1 for k in range(1, m + 1) if math.gcd(k, m) == 1)


# ---------------------------------------------------------------------------
# cyclotomic ring


def test_cyclotomic_poly_known_values():
    assert cyclotomic_poly(1) == (-1, 1)
    assert cyclotomic_poly(2) == (1, 1)
    assert cyclotomic_poly(3) == (1, 1, 1)
    assert cyclotomic_poly(4) == (1, 0, 1)
    assert cyclotomic_poly(6) == (1, -1, 1)
    assert cyclotomic_poly(12) == (1, 0, -1, 0, 1)


@pytest.mark.parametrize("m", list(range(1, 31)) + [60, 156])
def test_cyclotomic_poly_degree_and_root(m):
    """Phi_m has degree phi(m) and zeta_m is a root."""
    assert len(cyclotomic_poly(m)) - 1 == euler_phi(m)
    z = CyclotomicInt.zeta(m)
    acc = CyclotomicInt.from_int(m, 0)
    for i, c in enumerate(cyclotomic_poly(m)):
        acc = acc + c * z**i
    assert acc == 0


@pytest.mark.parametrize("m", [1, 2, 6, 12, 20])
def test_zeta_is_primitive(m):
    z = CyclotomicInt.zeta(m)
    assert z**m == 1
    for k in range(1, m):
        assert z**k != 1


coeff_vec = st.lists(st.integers(-9, 9), min_size=4, max_size=4)


@settings(max_examples=60, deadline=None)
@given(coeff_vec, coeff_vec, coeff_vec)
def test_ring_laws_conductor_12(ac, bc, cc):
    a = CyclotomicInt.make(12, ac)
    b = CyclotomicInt.make(12, bc)
    c = CyclotomicInt.make(12, cc)
    assert a + b == b + a
    assert a * b == b * a
    assert (a + b) + c == a + (b + c)
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a - a == 0
    assert a * 1 == a


@settings(max_examples=40, deadline=None)
@given(coeff_vec, coeff_vec, st.sampled_from([1, 5, 7, 11]))
def test_galois_is_ring_map(ac, bc, t):
    a = CyclotomicInt.make(12, ac)
    b = CyclotomicInt.make(12, bc)
    assert (a * b).galois(t) == a.galois(t) * b.galois(t)
    assert (a + b).galois(t) == a.galois(t) + b.galois(t)


def test_reduction_idempotent_and_embed():
    x = CyclotomicInt.make(12, [3, 1, 4, 1, 5, 9, 2, 6])
    again = CyclotomicInt.make(12, x.coeffs)
    assert x == again
    assert CyclotomicInt.zeta(6).embed(12) == CyclotomicInt.zeta(12) ** 2
    y = CyclotomicInt.make(6, [2, -1])
    assert y.embed(12).galois(5) == CyclotomicInt.make(6, [2, -1]).galois(5).embed(12)
    with pytest.raises(ValueError):
        CyclotomicInt.zeta(4).embed(6)


def test_conductor_cap():
    assert conductor(3, 4) == 12
    with pytest.raises(ConductorTooLarge):
        conductor(2048)


# ---------------------------------------------------------------------------
# finite fields and unit groups


@pytest.mark.parametrize("q", GAUSS_ORDERS)
def test_field_tables(q):
    F = GF(q)
    assert len(F.elements) == q
    assert F.elements[0] == (0,) * F.r
    # generator powers enumerate every nonzero element exactly once
    assert sorted(F.exp) == list(range(1, q))
    # trace is additive and Frobenius-invariant
    for i in range(q):
        assert F.trace(F.pow(i, F.p)) == F.trace(i)
        for j in range(q):
            assert F.trace(F.add(i, j)) == (F.trace(i) + F.trace(j)) % F.p
    # trace is onto F_p (nondegenerate pairing needs a nonzero value)
    assert set(F.trace(i) for i in range(q)) == set(range(F.p))


def test_prime_field_indices_are_residues():
    F = GF(7)
    for i in range(7):
        for j in range(7):
            assert F.add(i, j) == (i + j) % 7
            assert F.mul(i, j) == (i * j) % 7
        assert F.trace(i) == i


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5, 8, 9, 12, 15, 16, 21])
def test_unit_group_structure(n):
    U = UnitGroup(n)
    expected = [u for u in range(n) if math.gcd(u, n) == 1] if n > 1 else [0]
    assert U.units == expected
    # dlog reconstructs every unit from the fixed generators
    for u in U.units:
        acc = 1 % n
        for (g, _), e in zip(U.gens, U.dlog(u)):
            acc = (acc * pow(g, e, n)) % n
        assert acc == u or n == 1
    assert len(all_unit_chars(U)) == len(U.units)


@pytest.mark.parametrize("n", [3, 4, 8, 12])
def test_unit_char_orthogonality(n):
    """Characters sum to zero over the group unless trivial."""
    U = UnitGroup(n)
    M = conductor(n, U.exponent)
    for chi in all_unit_chars(U):
        total = CyclotomicInt.from_int(M, 0)
        for u in U.units:
            total = total + chi.value(u, M)
        if chi.is_trivial():
            assert total == len(U.units)
        else:
            assert total == 0


# ---------------------------------------------------------------------------
# Gauss sums


@pytest.mark.parametrize("q", GAUSS_ORDERS)
def test_gauss_sum_laws(q):
    F = GF(q)
    for psi in all_field_chars(F):
        if psi.is_trivial():
            assert gauss_sum(psi) == -1
            continue
        M = conductor(F.p, q - 1)
        W = gauss_sum(psi, M)
        Winv = gauss_sum(psi.inverse(), M)
        assert W * Winv == psi.at_minus_one(M) * CyclotomicInt.from_int(M, q)
        # |W|^2 = q, conjugation realized by the galois map zeta -> zeta^-1
        assert W * W.galois(M - 1) == q


def test_gauss_sum_default_conductor():
    F = GF(5)
    psi = FieldChar(F, 2)
    assert gauss_sum(psi).m == 10
    assert psi.order == 2


def test_quadratic_gauss_sum_squares_to_five():
    W = gauss_sum(FieldChar(GF(5), 2))
    assert W * W == 5


@pytest.mark.parametrize("q", [3, 4, 5, 9])
def test_twisted_sum_law(q):
    """twisted_sum(psi, t) = psi^-1(t) W(psi) for t != 0, and 0 at t = 0."""
    F = GF(q)
    for psi in all_field_chars(F):
        if psi.is_trivial():
            continue
        M = conductor(F.p, q - 1)
        W = gauss_sum(psi, M)
        assert twisted_sum(psi, 0, M) == 0
        for t in range(1, q):
            assert twisted_sum(psi, t, M) == psi.inverse().value(t, M) * W


def test_twisted_sum_quadratic_flip():
    quad = FieldChar(GF(5), 2)
    assert twisted_sum(quad, 2) == -gauss_sum(quad)


# ---------------------------------------------------------------------------
# companion coefficients and the twist identity


def _setup(q, n):
    F, U = GF(q), UnitGroup(n)
    M = conductor(F.p, q - 1, n, U.exponent)
    return F, U, M


def test_build_companion_coeffs_relations():
    F, U, M = _setup(3, 4)
    psi_p = FieldChar(F, 1)
    psi_n = [c for c in all_unit_chars(U) if not c.is_trivial()][0]
    seed = random_twist_seed(F, U, M, 5)
    r, s, C = 2, 3, 4
    a, b = build_companion_coeffs(F, U, psi_p, psi_n, r, s, C, seed, M)
    for v in U.units:
        assert b.at(0, v) == s * b.reduced[v]
        assert a.at(0, v) == r * C * psi_n.value(v, M) * b.reduced[v]
    for u in range(1, 3):
        for v in U.units:
            assert a.at(u, v) == C * psi_p.value(u, M) * psi_n.value(v, M) * b.at(u, v)
    for u in range(3):
        for v in range(4):
            if v in (0, 2):
                assert a.at(u, v) == 0 and b.at(u, v) == 0


def test_build_companion_coeffs_rejects_bad_seed():
    F, U, M = _setup(3, 4)
    psi_p = FieldChar(F, 1)
    psi_n = all_unit_chars(U)[0]
    good = random_twist_seed(F, U, M, 1)
    missing = TwistSeed(dict(list(good.b_full.items())[:-1]), good.b_reduced)
    extra = TwistSeed({**good.b_full, (0, 1): CyclotomicInt.from_int(M, 1)}, good.b_reduced)
    for bad in (missing, extra):
        with pytest.raises(InconsistentSeed):
            build_companion_coeffs(F, U, psi_p, psi_n, 2, 3, 1, bad, M)


@pytest.mark.parametrize("q,n", [(3, 4), (5, 3), (9, 4)])
def test_twist_identity_all_characters(q, n):
    F, U, M = _setup(q, n)
    for psi_p in all_field_chars(F):
        if psi_p.is_trivial():
            continue
        for psi_n in all_unit_chars(U):
            for sd in range(3):
                seed = random_twist_seed(F, U, M, sd)
                rep = verify_twist_identity(F, U, psi_p, psi_n, 2, 3, 1, seed)
                assert rep.passed, (psi_p.exp, psi_n.exps, sd, rep.mismatch_index)
                assert rep.conductor == M


def test_twist_identity_root_of_unity_scalars():
    F, U, M = _setup(5, 3)
    psi_p = FieldChar(F, 1)
    psi_n = [c for c in all_unit_chars(U) if not c.is_trivial()][0]
    seed = random_twist_seed(F, U, M, 11)
    C = CyclotomicInt.zeta(M, 7)
    rep = verify_twist_identity(F, U, psi_p, psi_n, 2, 3, C, seed)
    assert rep.passed


def test_twist_identity_corrupted_control_fails():
    F, U, M = _setup(3, 4)
    psi_p = FieldChar(F, 1)
    psi_n = [c for c in all_unit_chars(U) if not c.is_trivial()][0]
    seed = random_twist_seed(F, U, M, 42)
    rep = verify_twist_identity(F, U, psi_p, psi_n, 2, 3, 1, seed, corrupt=True)
    assert not rep.passed
    assert rep.mismatch_index == (1, 1)
    assert rep.to_json_dict()["mismatch_index"] == [1, 1]


def test_twist_identity_corruption_masked_cases_raise():
    """Trivial psi_n mod 4 kills every unit twisted sum, so does C = 0."""
    F, U, M = _setup(3, 4)
    psi_p = FieldChar(F, 1)
    triv = [c for c in all_unit_chars(U) if c.is_trivial()][0]
    seed = random_twist_seed(F, U, M, 1)
    with pytest.raises(ValueError):
        verify_twist_identity(F, U, psi_p, triv, 2, 3, 1, seed, corrupt=True)
    nontriv = [c for c in all_unit_chars(U) if not c.is_trivial()][0]
    with pytest.raises(ValueError):
        verify_twist_identity(F, U, psi_p, nontriv, 2, 3, 0, seed, corrupt=True)


def test_twist_identity_trivial_psi_p_rejected():
    F, U, M = _setup(3, 4)
    seed = random_twist_seed(F, U, M, 0)
    with pytest.raises(TrivialCharacter):
        verify_twist_identity(F, U, FieldChar(F, 0), all_unit_chars(U)[0], 2, 3, 1, seed)


def test_twist_identity_degenerate_modulus_one():
    """n = 1 reduces the identity to the single-prime statement and passes."""
    F, U, M = GF(3), UnitGroup(1), conductor(3, 2)
    assert U.units == [0]
    psi_p = FieldChar(F, 1)
    chi = all_unit_chars(U)[0]
    assert chi.is_trivial()
    assert unit_twisted_sum(chi, 0, M) == 1
    seed = random_twist_seed(F, U, M, 9)
    rep = verify_twist_identity(F, U, psi_p, chi, 4, 5, 2, seed)
    assert rep.passed


def test_coeff_family_shape():
    F, U, M = _setup(3, 4)
    psi_p = FieldChar(F, 1)
    psi_n = all_unit_chars(U)[1]
    a, b = build_companion_coeffs(F, U, psi_p, psi_n, 1, 1, 1, random_twist_seed(F, U, M, 2), M)
    assert isinstance(a, CoeffFamily) and isinstance(b, CoeffFamily)
    assert set(a.full) == {(u, v) for u in range(3) for v in range(4)}
    assert set(a.reduced) == set(U.units)
