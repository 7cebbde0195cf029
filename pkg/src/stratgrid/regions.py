"""Membership predicates for valuation regions on the degree cube.

The central predicate is three-valued: In, Out, or Indeterminate.  A point
qualifies only when its stratum has codimension at most 1 and no block is
entirely Zero; codimension-1 points split by goodness, and the bad cases gate
on the free coordinate against geometric series thresholds.  Everything is
exact rational arithmetic.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from itertools import combinations, product

from .degrees import DegreeVector, _pair_from_entries, w_T_deg
from .embeddings import PrimeProfile
from .strata import (
    Badness,
    Face,
    FaceCoord,
    classify,
    codim,
    flip_face,
    pair_of_face,
    vertex_decomposition,
)

__all__ = [
    "Verdict",
    "SigmaCase",
    "IntervalQ",
    "delta",
    "delta_star",
    "istar_interval",
    "in_interval_region",
    "in_vcan",
    "sigma_case",
    "in_sigma",
    "in_sigma_S",
    "coverage_check",
    "CoverageReport",
]

ZERO = Fraction(0)
ONE = Fraction(1)


class Verdict(Enum):
    IN = "in"
    OUT = "out"
    INDETERMINATE = "indeterminate"


def delta(p: int, j: int) -> Fraction:
    """Partial geometric sum 1/p + ... + 1/p^j."""
    if j < 1:
        raise ValueError(f"delta needs j >= 1, got {j}")
    return sum((Fraction(1, p**i) for i in range(1, j + 1)), ZERO)


def delta_star(p: int, f: int) -> Fraction:
    """Full tail sum for a block of size f; zero when f = 1."""
    return delta(p, f - 1) if f > 1 else ZERO


@dataclass(frozen=True)
class IntervalQ:
    lo: Fraction
    hi: Fraction
    lo_open: bool = True
    hi_open: bool = True

    def contains(self, v: Fraction) -> bool:
        if self.lo_open:
            if v <= self.lo:
                return False
        elif v < self.lo:
            return False
        if self.hi_open:
            if v >= self.hi:
                return False
        elif v > self.hi:
            return False
        return True

    def to_json_list(self) -> list:
        return [str(self.lo), str(self.hi)]


def istar_interval(p: int, f: int) -> IntervalQ:
    """Per-prime saturation window for total block degree."""
    return IntervalQ(delta_star(p, f), ONE) if f > 1 else IntervalQ(ZERO, ONE)


def in_interval_region(h: DegreeVector) -> bool:
    """Whether every block's total degree lies in its saturation window."""
    profile = h.profile
    return all(
        istar_interval(profile.p, profile.f[i]).contains(h.deg_prime(i))
        for i in range(profile.n_primes)
    )


def in_vcan(h: DegreeVector) -> bool:
    """Canonical-locus test: blockwise p*pred + value > 1, or value > 0 when f=1."""
    profile = h.profile
    p = profile.p
    for i in range(profile.n_primes):
        f, off = profile.f[i], profile.offsets[i]
        if f == 1:
            if not h[off] > 0:
                return False
        else:
            for pos in range(f):
                pred = off + (pos - 1) % f
                if not p * h[pred] + h[off + pos] > 1:
                    return False
    return True


@dataclass(frozen=True)
class SigmaCase:
    """Resolved case data for a degree vector, reused by the sweeps."""

    kind: str  # etale | codim_ge2 | codim0 | good | bad_full_eta | bad_partial_eta
    verdict: Verdict
    beta0: int | None = None
    j: int | None = None
    threshold: Fraction | None = None  # delta_star for 2b, delta_j for 2c


def sigma_case(h: DegreeVector) -> SigmaCase:
    pair = _pair_from_entries(h)
    cls = classify(pair)
    if not cls.nowhere_etale:
        return SigmaCase("etale", Verdict.OUT)
    c = codim(pair)
    if c >= 2:
        return SigmaCase("codim_ge2", Verdict.OUT)
    if c == 0:
        return SigmaCase("codim0", Verdict.IN if h.generic else Verdict.OUT)
    beta0 = cls.beta0
    p = h.profile.p
    f0 = h.profile.f[h.profile.prime_of(beta0)]
    if cls.badness is Badness.GOOD:
        return SigmaCase("good", Verdict.IN if h.generic else Verdict.OUT, beta0)
    if cls.j is None:
        # eta fills the block; membership is the open interval above the tail
        # sum and needs no generic flag
        thr = delta_star(p, f0)
        verdict = Verdict.IN if h[beta0] > thr else Verdict.OUT
        return SigmaCase("bad_full_eta", verdict, beta0, None, thr)
    thr = delta(p, cls.j)
    if not h.generic:
        return SigmaCase("bad_partial_eta", Verdict.OUT, beta0, cls.j, thr)
    verdict = Verdict.INDETERMINATE if h[beta0] == thr else Verdict.IN
    return SigmaCase("bad_partial_eta", verdict, beta0, cls.j, thr)


def in_sigma(h: DegreeVector) -> Verdict:
    """Three-valued membership of a degree vector in the base region."""
    return sigma_case(h).verdict


def _combine(verdicts) -> Verdict:
    out = Verdict.OUT
    for v in verdicts:
        if v is Verdict.IN:
            return Verdict.IN
        if v is Verdict.INDETERMINATE:
            out = Verdict.INDETERMINATE
    return out


def in_sigma_S(h: DegreeVector, S, generic_by_T=None) -> Verdict:
    """Union of transported regions over all subsets T of S.

    generic_by_T optionally maps frozenset(T) to the generic flag assumed for
    the transported vector; by default the flag carries over, so a vector
    flagged generic is assumed generic in every chart.
    """
    S = sorted(set(S))
    for i in S:
        if not (0 <= i < h.profile.n_primes):
            raise ValueError(f"prime index {i} out of range for {h.profile}")
    verdicts = []
    for r in range(len(S) + 1):
        for T in combinations(S, r):
            flag = None
            if generic_by_T is not None:
                flag = generic_by_T.get(frozenset(T))
            verdicts.append(in_sigma(w_T_deg(h, T, generic=flag)))
    return _combine(verdicts)


@dataclass(frozen=True)
class CoverageReport:
    profile: PrimeProfile
    passed: bool
    vertex_failures: tuple
    edge_failures: tuple

    def to_json_dict(self) -> dict:
        return {
            "schema": "1",
            "check": "coverage",
            "profile": self.profile.to_json_dict(),
            "pass": self.passed,
            "vertex_failures": list(self.vertex_failures),
            "edge_failures": list(self.edge_failures),
        }


def _face_coords_json(face: Face) -> list[str]:
    names = {FaceCoord.ZERO: "0", FaceCoord.ONE: "1", FaceCoord.OPEN: "*"}
    return [names[c] for c in face.coords]


def coverage_check(profile: PrimeProfile) -> CoverageReport:
    """Vertex and edge coverage of the degree cube by transported charts.

    For every vertex, flipping the all-Zero blocks (with or without the mixed
    blocks) must land on nowhere-etale strata.  For every edge, the two
    transported charts cover free-coordinate intervals (t, 1) and (0, 1-t)
    with t the tail sum of the free block; these cover (0,1) iff 1-t > t,
    which fails exactly when p = 2 and the free block has size >= 2.
    """
    g = profile.g
    p = profile.p
    vertex_failures = []
    for bits in product((FaceCoord.ZERO, FaceCoord.ONE), repeat=g):
        face = Face(profile, bits)
        t0, _, t2 = vertex_decomposition(face)
        for tag, tset in (("T0", t0), ("T0+T2", t0 + t2)):
            moved = flip_face(face, tset)
            if not classify(pair_of_face(moved)).nowhere_etale:
                vertex_failures.append(
                    {"vertex": _face_coords_json(face), "flip": tag}
                )
    edge_failures = []
    for beta0 in range(g):
        i0 = profile.prime_of(beta0)
        t = delta_star(p, profile.f[i0])
        rest = [k for k in range(g) if k != beta0]
        for bits in product((FaceCoord.ZERO, FaceCoord.ONE), repeat=g - 1):
            coords = [FaceCoord.OPEN] * g
            for k, b in zip(rest, bits):
                coords[k] = b
            face = Face(profile, tuple(coords))
            t0 = tuple(
                i
                for i in range(profile.n_primes)
                if i != i0
                and all(
                    face.coords[profile.offsets[i] + pos] is FaceCoord.ZERO
                    for pos in range(profile.f[i])
                )
            )
            issues = []
            for tag, tset in (("T0", t0), ("T0+p0", t0 + (i0,))):
                moved = flip_face(face, tset)
                if not classify(pair_of_face(moved)).nowhere_etale:
                    issues.append({"flip": tag, "issue": "etale"})
            if not ONE - t > t:
                issues.append(
                    {
                        "issue": "gap",
                        "covered": [
                            IntervalQ(t, ONE).to_json_list(),
                            IntervalQ(ZERO, ONE - t).to_json_list(),
                        ],
                        "gap": [str(ONE - t), str(t)],
                    }
                )
            for issue in issues:
                edge_failures.append(
                    {"edge": _face_coords_json(face), "beta0": beta0, **issue}
                )
    passed = not vertex_failures and not edge_failures
    return CoverageReport(profile, passed, tuple(vertex_failures), tuple(edge_failures))
