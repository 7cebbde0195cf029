"""Rational degree vectors on the embedding universe and their inequalities.

A degree vector assigns each embedding a rational in [0, 1].  Two flags ride
along: `generic` (the specialization hypothesis several constraint families
need) and `cusp` (degenerate boundary points whose One-set must be a union of
whole blocks).  All arithmetic is exact via Fraction.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction

from .embeddings import PrimeProfile, shift_right
from .strata import Face, FaceCoord, StratumPair

__all__ = [
    "DegreeVectorError",
    "CuspInput",
    "GenericFlagRequired",
    "ProfileMismatch",
    "DegreeVector",
    "HodgeInterval",
    "pair_of_degvec",
    "face_of_degvec",
    "w_T_deg",
    "one_minus",
    "hodge_height",
    "raynaud_feasible",
    "genericity_constraints",
]

ZERO = Fraction(0)
ONE = Fraction(1)


class DegreeVectorError(ValueError):
    """Entries out of range or malformed serialization."""


class CuspInput(ValueError):
    """Operation undefined on cusp vectors."""


class GenericFlagRequired(ValueError):
    """Constraint family only applies under the generic flag."""


class ProfileMismatch(ValueError):
    """Two arguments carry different prime profiles."""


def _as_fraction(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, int):
        return Fraction(v)
    if isinstance(v, str):
        try:
            return Fraction(v)
        except (ValueError, ZeroDivisionError) as e:
            raise DegreeVectorError(f"bad fraction string {v!r}: {e}") from None
    raise DegreeVectorError(f"cannot interpret {v!r} as an exact rational")


@dataclass(frozen=True)
class DegreeVector:
    profile: PrimeProfile
    entries: tuple[Fraction, ...]
    generic: bool = False
    cusp: bool = False

    def __post_init__(self) -> None:
        entries = tuple(_as_fraction(v) for v in self.entries)
        if len(entries) != self.profile.g:
            raise DegreeVectorError(
                f"need {self.profile.g} entries for {self.profile}, got {len(entries)}"
            )
        if any(v < 0 or v > 1 for v in entries):
            raise DegreeVectorError("degree entries must lie in [0, 1]")
        if self.cusp:
            for i in range(self.profile.n_primes):
                off = self.profile.offsets[i]
                block = entries[off : off + self.profile.f[i]]
                if not (all(v == ONE for v in block) or all(v == ZERO for v in block)):
                    raise DegreeVectorError(
                        "cusp vectors are 0/1 with blockwise-constant One-set"
                    )
        object.__setattr__(self, "entries", entries)

    def __getitem__(self, k: int) -> Fraction:
        return self.entries[k]

    def deg_prime(self, i: int) -> Fraction:
        off = self.profile.offsets[i]
        return sum(self.entries[off : off + self.profile.f[i]], ZERO)

    def to_json_dict(self) -> dict:
        return {
            "deg": {self.profile.label(k): str(v) for k, v in enumerate(self.entries)},
            "generic": self.generic,
            "cusp": self.cusp,
        }

    @classmethod
    def from_json_dict(cls, profile: PrimeProfile, data: dict) -> "DegreeVector":
        if not isinstance(data, dict) or "deg" not in data:
            raise DegreeVectorError(f"degree JSON needs a 'deg' mapping, got {data!r}")
        deg = data["deg"]
        entries = [None] * profile.g
        for label, val in deg.items():
            entries[profile.index_of_label(label)] = _as_fraction(val)
        if any(e is None for e in entries):
            missing = [profile.label(k) for k, e in enumerate(entries) if e is None]
            raise DegreeVectorError(f"missing degree entries for {missing}")
        return cls(
            profile,
            tuple(entries),
            generic=bool(data.get("generic", False)),
            cusp=bool(data.get("cusp", False)),
        )


def _pair_from_entries(h: DegreeVector) -> StratumPair:
    positive = 0
    below_one = 0
    for k, v in enumerate(h.entries):
        if v > 0:
            positive |= 1 << k
        if v < 1:
            below_one |= 1 << k
    phi = shift_right(h.profile, positive)
    eta = below_one
    return StratumPair(h.profile, phi, eta)


def pair_of_degvec(h: DegreeVector) -> StratumPair:
    """Stratum pair of a degree vector; always admissible.

    phi collects embeddings whose predecessor coordinate is positive, eta those
    with coordinate below one.
    """
    if h.cusp:
        raise CuspInput("cusp vectors do not define a stratum pair")
    return _pair_from_entries(h)


def face_of_degvec(h: DegreeVector) -> Face:
    coords = tuple(
        FaceCoord.ZERO if v == 0 else FaceCoord.ONE if v == 1 else FaceCoord.OPEN
        for v in h.entries
    )
    return Face(h.profile, coords)


def w_T_deg(h: DegreeVector, T, generic: bool | None = None) -> DegreeVector:
    """Blockwise degree flip v -> 1 - v on the primes in T.

    The generic flag of the image is caller-supplied; by default it is carried
    over unchanged.
    """
    tset = set(T)
    for i in tset:
        if not (0 <= i < h.profile.n_primes):
            raise ValueError(f"prime index {i} out of range for {h.profile}")
    entries = list(h.entries)
    for i in tset:
        off = h.profile.offsets[i]
        for pos in range(h.profile.f[i]):
            entries[off + pos] = ONE - entries[off + pos]
    return replace(
        h, entries=tuple(entries), generic=h.generic if generic is None else generic
    )


def one_minus(h: DegreeVector) -> DegreeVector:
    """Coordinatewise 1 - v, the degree vector of the quotient datum."""
    return replace(h, entries=tuple(ONE - v for v in h.entries))


@dataclass(frozen=True)
class HodgeInterval:
    """Possible values of a partial Hodge height: a point or [lower, 1]."""

    lower: Fraction
    upper: Fraction
    exact: bool

    def contains(self, v: Fraction) -> bool:
        return self.lower <= v <= self.upper

    def intersects(self, other: "HodgeInterval") -> bool:
        return max(self.lower, other.lower) <= min(self.upper, other.upper)

    def to_json_dict(self) -> dict:
        return {"lower": str(self.lower), "upper": str(self.upper), "exact": self.exact}


def _clamp01(v: Fraction) -> Fraction:
    return ZERO if v < 0 else ONE if v > 1 else v


def hodge_height(h: DegreeVector, beta: int) -> HodgeInterval:
    """Height bound at beta: min(p * value at predecessor, 1 - value at beta).

    When the two arguments differ the height is pinned to the minimum; when
    they coincide only the lower bound survives and the interval runs up to 1.
    Values are clamped to [0, 1].
    """
    profile = h.profile
    i, pos = profile.emb(beta)
    pred = profile.index(i, (pos - 1) % profile.f[i])
    a = profile.p * h[pred]
    b = ONE - h[beta]
    if a != b:
        v = _clamp01(min(a, b))
        return HodgeInterval(v, v, True)
    return HodgeInterval(_clamp01(a), ONE, False)


def _require_same_profile(h: DegreeVector, d: DegreeVector) -> None:
    if h.profile != d.profile:
        raise ProfileMismatch(f"{h.profile} vs {d.profile}")


def raynaud_feasible(h: DegreeVector, d: DegreeVector, i: int) -> bool:
    """Anchored valuation inequalities on the block of prime i.

    For every anchor beta in the block, the p-weighted cyclic sum of d must
    not exceed the matching weighted sum of 1 - h.
    """
    _require_same_profile(h, d)
    profile = h.profile
    p, f, off = profile.p, profile.f[i], profile.offsets[i]
    for start in range(f):
        lhs = ZERO
        rhs = ZERO
        for k in range(f):
            w = p ** (f - 1 - k)
            idx = off + (start + k) % f
            lhs += w * d[idx]
            rhs += w * (ONE - h[idx])
        if lhs > rhs:
            return False
    return True


def genericity_constraints(h: DegreeVector, d: DegreeVector, i: int) -> bool:
    """Constraints available only for generic h, on the block of prime i.

    Where h is 1: d is at most the tail sum of p-th powers and the predecessor
    entry of d vanishes.  Where h's predecessor entry is 0 and d is below 1:
    the predecessor entry of d vanishes.
    """
    _require_same_profile(h, d)
    if not h.generic:
        raise GenericFlagRequired("genericity constraints need h.generic")
    profile = h.profile
    p, f, off = profile.p, profile.f[i], profile.offsets[i]
    tail = sum((Fraction(1, p**k) for k in range(1, f)), ZERO)
    for pos in range(f):
        beta = off + pos
        pred = off + (pos - 1) % f
        if h[beta] == ONE:
            if d[beta] > tail or d[pred] != ZERO:
                return False
        if h[pred] == ZERO and d[beta] < ONE:
            if d[pred] != ZERO:
                return False
    return True
