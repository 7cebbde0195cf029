"""Stratum pairs against a brute-force oracle, plus face and transport laws."""
from __future__ import annotations

import pytest
from hypothesis import given, settings, strategies as st

from stratgrid.embeddings import PrimeProfile, shift_left, subset_to_indices
from stratgrid.strata import (
    Badness,
    EnumerationBound,
    Face,
    FaceCoord,
    InadmissiblePair,
    NotAVertex,
    StratumPair,
    classify,
    closure_set,
    codim,
    enumerate_admissible,
    face_of_pair,
    flip_face,
    is_admissible,
    pair_of_face,
    pi_image,
    vertex_decomposition,
    vertex_of_primes,
    w_T_pair,
)

PROFILES = [
    PrimeProfile(3, (1,)),
    PrimeProfile(3, (2,)),
    PrimeProfile(3, (1, 1)),
    PrimeProfile(3, (3,)),
    PrimeProfile(3, (2, 1)),
    PrimeProfile(5, (2, 2)),
    PrimeProfile(2, (2, 1)),
]


def oracle_admissible(profile: PrimeProfile, phi: int, eta: int) -> bool:
    # positionwise restatement: every beta outside phi has its predecessor in eta
    full = profile.full_mask
    for k in range(profile.g):
        if phi >> k & 1:
            continue
        i, pos = profile.emb(k)
        pred = profile.index(i, (pos - 1) % profile.f[i])
        if not eta >> pred & 1:
            return False
    return True


def brute_pairs(profile: PrimeProfile) -> list[tuple[int, int]]:
    full = profile.full_mask
    return [
        (phi, eta)
        for phi in range(full + 1)
        for eta in range(full + 1)
        if oracle_admissible(profile, phi, eta)
    ]


@st.composite
def admissible_pair(draw, profiles=PROFILES):
    profile = draw(st.sampled_from(profiles))
    full = profile.full_mask
    phi = draw(st.integers(min_value=0, max_value=full))
    extra = draw(st.integers(min_value=0, max_value=full))
    eta = shift_left(profile, full & ~phi) | (extra & shift_left(profile, phi))
    return StratumPair(profile, phi, eta)


@pytest.mark.parametrize("profile", PROFILES)
def test_census_matches_brute_force(profile):
    got = [(p.phi, p.eta) for p in enumerate_admissible(profile)]
    assert got == sorted(brute_pairs(profile))
    assert len(got) == 3**profile.g


def test_enumeration_bound():
    with pytest.raises(EnumerationBound):
        enumerate_admissible(PrimeProfile(3, (13,)))


def test_inadmissible_rejected():
    profile = PrimeProfile(3, (2,))
    # phi empty forces eta to contain everything
    with pytest.raises(InadmissiblePair):
        StratumPair(profile, 0, 0b01)
    assert not is_admissible(profile, 0, 0b01)
    assert is_admissible(profile, 0, 0b11)


@given(admissible_pair())
def test_codim_bounds(pair):
    c = codim(pair)
    assert 0 <= c <= pair.profile.g
    # codim equals the number of Open face coordinates
    assert c == face_of_pair(pair).dim


@given(admissible_pair())
@settings(max_examples=60)
def test_closure_is_upward_closed_and_codim_monotone(pair):
    cl = closure_set(pair)
    assert pair in cl
    base = codim(pair)
    for q in cl:
        assert q.phi & pair.phi == pair.phi and q.eta & pair.eta == pair.eta
        assert codim(q) >= base
    # oracle: direct filter over the census
    expected = [
        (q.phi, q.eta)
        for q in enumerate_admissible(pair.profile)
        if q.phi & pair.phi == pair.phi and q.eta & pair.eta == pair.eta
    ]
    assert sorted((q.phi, q.eta) for q in cl) == sorted(expected)


@given(admissible_pair())
def test_pi_image_cardinality(pair):
    taus = pi_image(pair)
    free = pair.profile.full_mask & ~pair.phi & ~pair.eta
    assert len(taus) == 1 << free.bit_count()
    base = pair.phi & pair.eta
    for tau in taus:
        assert tau & base == base and tau & ~(base | free) == 0


@given(admissible_pair(), st.data())
def test_w_T_involution_and_result_admissible(pair, data):
    T = data.draw(st.sets(st.integers(0, pair.profile.n_primes - 1)))
    moved = w_T_pair(pair, T)  # constructor revalidates admissibility
    assert w_T_pair(moved, T) == pair


@given(admissible_pair(), st.data())
def test_w_T_intertwines_face_flip(pair, data):
    T = data.draw(st.sets(st.integers(0, pair.profile.n_primes - 1)))
    lhs = face_of_pair(w_T_pair(pair, T))
    rhs = flip_face(face_of_pair(pair), T)
    assert lhs == rhs


@pytest.mark.parametrize("profile", PROFILES[:5])
def test_face_round_trip_over_census(profile):
    for pair in enumerate_admissible(profile):
        face = face_of_pair(pair)
        assert pair_of_face(face) == pair
    # and the other direction over all 3^g faces
    import itertools

    for coords in itertools.product(list(FaceCoord), repeat=profile.g):
        face = Face(profile, coords)
        assert face_of_pair(pair_of_face(face)) == face


def test_classify_examples():
    profile = PrimeProfile(3, (3,))
    # face (Open, Zero, One): bad with a single Zero after beta0, so j = 1
    face = Face(profile, (FaceCoord.OPEN, FaceCoord.ZERO, FaceCoord.ONE))
    cls = classify(pair_of_face(face))
    assert cls.badness is Badness.BAD and cls.beta0 == 0 and cls.j == 1
    assert cls.nowhere_etale
    # face (Open, Zero, Zero): eta fills the block, no j
    face2 = Face(profile, (FaceCoord.OPEN, FaceCoord.ZERO, FaceCoord.ZERO))
    cls2 = classify(pair_of_face(face2))
    assert cls2.badness is Badness.BAD and cls2.beta0 == 0 and cls2.j is None
    # face (Open, One, Zero): successor of beta0 is One, good
    face3 = Face(profile, (FaceCoord.OPEN, FaceCoord.ONE, FaceCoord.ZERO))
    cls3 = classify(pair_of_face(face3))
    assert cls3.badness is Badness.GOOD and cls3.beta0 == 0 and cls3.j is None


def test_classify_f1_always_good():
    profile = PrimeProfile(3, (1, 1))
    face = Face(profile, (FaceCoord.OPEN, FaceCoord.ONE))
    assert classify(pair_of_face(face)).badness is Badness.GOOD


def test_classify_f2_bad_has_no_j():
    # with a block of size 2 the Zero run after beta0 fills the block
    profile = PrimeProfile(3, (2,))
    face = Face(profile, (FaceCoord.OPEN, FaceCoord.ZERO))
    cls = classify(pair_of_face(face))
    assert cls.badness is Badness.BAD and cls.j is None


@pytest.mark.parametrize("profile", PROFILES)
def test_classify_j_range(profile):
    # genuine bad strata with eta not filling the block have 1 <= j <= f-2
    for pair in enumerate_admissible(profile, codim_filter=1):
        cls = classify(pair)
        if cls.j is not None:
            f0 = profile.f[profile.prime_of(cls.beta0)]
            assert 1 <= cls.j <= f0 - 2


def test_etale_detection():
    profile = PrimeProfile(3, (2, 1))
    # all-Zero block on prime 0: phi empty there, eta full there
    face = Face(profile, (FaceCoord.ZERO, FaceCoord.ZERO, FaceCoord.ONE))
    assert not classify(pair_of_face(face)).nowhere_etale
    face2 = Face(profile, (FaceCoord.ONE, FaceCoord.ZERO, FaceCoord.ONE))
    assert classify(pair_of_face(face2)).nowhere_etale


def test_vertex_decomposition_and_transport():
    profile = PrimeProfile(3, (2, 1, 2))
    face = Face(
        profile,
        (FaceCoord.ZERO, FaceCoord.ZERO, FaceCoord.ONE, FaceCoord.ONE, FaceCoord.ZERO),
    )
    t0, t1, t2 = vertex_decomposition(face)
    assert (t0, t1, t2) == ((0,), (1,), (2,))
    with pytest.raises(NotAVertex):
        vertex_decomposition(Face(profile, (FaceCoord.OPEN,) + face.coords[1:]))
    # flipping the all-Zero blocks makes every block carry a One: nowhere etale
    fixed = flip_face(face, t0)
    assert classify(pair_of_face(fixed)).nowhere_etale
    fixed2 = flip_face(face, t0 + t2)
    assert classify(pair_of_face(fixed2)).nowhere_etale


@pytest.mark.parametrize("profile", PROFILES)
def test_vertex_transport_nowhere_etale_exhaustive(profile):
    # for every vertex, flipping T0 or T0 | T2 yields a nowhere-etale stratum
    import itertools

    for bits in itertools.product((FaceCoord.ZERO, FaceCoord.ONE), repeat=profile.g):
        face = Face(profile, bits)
        t0, t1, t2 = vertex_decomposition(face)
        assert classify(pair_of_face(flip_face(face, t0))).nowhere_etale
        assert classify(pair_of_face(flip_face(face, t0 + t2))).nowhere_etale


def test_vertex_of_primes():
    profile = PrimeProfile(3, (2, 1))
    face = vertex_of_primes(profile, {1})
    assert face.coords == (FaceCoord.ZERO, FaceCoord.ZERO, FaceCoord.ONE)


def test_pair_json_record():
    profile = PrimeProfile(3, (2,))
    pair = pair_of_face(Face(profile, (FaceCoord.OPEN, FaceCoord.ZERO)))
    rec = pair.to_json_dict()
    assert rec == {
        "phi": subset_to_indices(pair.phi),
        "eta": [0, 1],
        "codim": 1,
        "nowhere_etale": True,
        "badness": "bad",
        "beta0": 0,
        "j": None,
    }
