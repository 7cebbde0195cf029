"""Admissible stratum pairs, their faces, and codimension-1 classification.

A pair of subsets (phi, eta) is admissible when every embedding outside phi
has its predecessor inside eta, i.e. shift_left(complement(phi)) is contained
in eta.  Admissible pairs index strata; their codimension is
|phi| + |eta| - g.  Each pair corresponds to a face of the unit degree cube:
coordinates are One on the complement of eta, Zero on the predecessor set of
the complement of phi, and Open (free in (0,1)) on the rest.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum, IntEnum

from .embeddings import (
    PrimeProfile,
    shift_left,
    shift_right,
    subset_to_indices,
)

__all__ = [
    "InadmissiblePair",
    "EnumerationBound",
    "NotAVertex",
    "Badness",
    "StratumPair",
    "StratumClass",
    "FaceCoord",
    "Face",
    "is_admissible",
    "codim",
    "enumerate_admissible",
    "closure_set",
    "pi_image",
    "w_T_pair",
    "classify",
    "face_of_pair",
    "pair_of_face",
    "flip_face",
    "vertex_of_primes",
    "vertex_decomposition",
    "ENUMERATION_MAX_G",
]

ENUMERATION_MAX_G = 12


class InadmissiblePair(ValueError):
    """Pair fails the predecessor-containment condition."""


class EnumerationBound(ValueError):
    """Profile too large for exhaustive enumeration."""


class NotAVertex(ValueError):
    """Face has an Open coordinate where a vertex is required."""


class Badness(Enum):
    GOOD = "good"
    BAD = "bad"
    NOT_CODIM1 = "not_codim1"


def is_admissible(profile: PrimeProfile, phi: int, eta: int) -> bool:
    """Whether shift_left(complement(phi)) is contained in eta."""
    full = profile.full_mask
    return shift_left(profile, full & ~phi) & ~eta == 0


@dataclass(frozen=True)
class StratumPair:
    profile: PrimeProfile
    phi: int
    eta: int

    def __post_init__(self) -> None:
        full = self.profile.full_mask
        if self.phi & ~full or self.eta & ~full or self.phi < 0 or self.eta < 0:
            raise InadmissiblePair(f"masks out of range for {self.profile}")
        if not is_admissible(self.profile, self.phi, self.eta):
            raise InadmissiblePair(
                f"pair phi={subset_to_indices(self.phi)} eta={subset_to_indices(self.eta)} "
                f"is not admissible for {self.profile}"
            )

    def to_json_dict(self) -> dict:
        cls = classify(self)
        return {
            "phi": subset_to_indices(self.phi),
            "eta": subset_to_indices(self.eta),
            "codim": codim(self),
            "nowhere_etale": cls.nowhere_etale,
            "badness": None if cls.badness is Badness.NOT_CODIM1 else cls.badness.value,
            "beta0": cls.beta0,
            "j": cls.j,
        }


def codim(pair: StratumPair) -> int:
    return pair.phi.bit_count() + pair.eta.bit_count() - pair.profile.g


def enumerate_admissible(
    profile: PrimeProfile,
    codim_filter: int | None = None,
    nowhere_etale: bool | None = None,
) -> list[StratumPair]:
    """All admissible pairs, ordered by (phi, eta) as integers.

    For each phi, eta must contain the predecessor set of phi's complement and
    is otherwise free inside the predecessor set of phi, so the census over
    all phi is 3^g.
    """
    if profile.g > ENUMERATION_MAX_G:
        raise EnumerationBound(f"g={profile.g} exceeds enumeration bound {ENUMERATION_MAX_G}")
    full = profile.full_mask
    out: list[StratumPair] = []
    for phi in range(full + 1):
        required = shift_left(profile, full & ~phi)
        free = shift_left(profile, phi)
        etas = []
        sub = free
        while True:
            etas.append(required | sub)
            if sub == 0:
                break
            sub = (sub - 1) & free
        for eta in sorted(etas):
            pair = StratumPair(profile, phi, eta)
            if codim_filter is not None and codim(pair) != codim_filter:
                continue
            if nowhere_etale is not None and classify(pair).nowhere_etale != nowhere_etale:
                continue
            out.append(pair)
    return out


def closure_set(pair: StratumPair) -> list[StratumPair]:
    """Admissible pairs (phi', eta') with phi' >= phi and eta' >= eta."""
    profile = pair.profile
    full = profile.full_mask
    out = []
    phis = []
    sub = full & ~pair.phi
    while True:
        phis.append(pair.phi | sub)
        if sub == 0:
            break
        sub = (sub - 1) & full & ~pair.phi
    for phi in sorted(phis):
        sub = full & ~pair.eta
        etas = []
        while True:
            etas.append(pair.eta | sub)
            if sub == 0:
                break
            sub = (sub - 1) & full & ~pair.eta
        for eta in sorted(etas):
            if is_admissible(profile, phi, eta):
                out.append(StratumPair(profile, phi, eta))
    return out


def pi_image(pair: StratumPair) -> list[int]:
    """Subsets tau with phi&eta <= tau <= (phi&eta) | (~phi&~eta).

    There are 2^|~phi & ~eta| of them.
    """
    full = pair.profile.full_mask
    base = pair.phi & pair.eta
    free = full & ~pair.phi & ~pair.eta
    out = []
    sub = free
    while True:
        out.append(base | sub)
        if sub == 0:
            break
        sub = (sub - 1) & free
    return sorted(out)


def w_T_pair(pair: StratumPair, T) -> StratumPair:
    """Blockwise transport: on each prime in T, (phi, eta) -> (r(eta), l(phi))."""
    profile = pair.profile
    tset = set(T)
    for i in tset:
        if not (0 <= i < profile.n_primes):
            raise ValueError(f"prime index {i} out of range for {profile}")
    phi, eta = pair.phi, pair.eta
    new_phi, new_eta = 0, 0
    r_eta = shift_right(profile, eta)
    l_phi = shift_left(profile, phi)
    for i in range(profile.n_primes):
        b = profile.block_mask(i)
        if i in tset:
            new_phi |= r_eta & b
            new_eta |= l_phi & b
        else:
            new_phi |= phi & b
            new_eta |= eta & b
    return StratumPair(profile, new_phi, new_eta)


@dataclass(frozen=True)
class StratumClass:
    nowhere_etale: bool
    badness: Badness
    beta0: int | None = None
    j: int | None = None


def classify(pair: StratumPair) -> StratumClass:
    """Nowhere-etale test plus goodness of codimension-1 strata.

    On a codim-1 pair exactly one embedding beta0 is Open.  The stratum is bad
    when the successor of beta0 is a Zero coordinate.  Bad strata split by
    whether eta fills beta0's whole block; when it does not, j >= 1 counts the
    run of Zeros after beta0 before the first One.
    """
    profile = pair.profile
    full = profile.full_mask
    zeros = shift_left(profile, full & ~pair.phi)
    ones = full & ~pair.eta
    nowhere = True
    for i in range(profile.n_primes):
        b = profile.block_mask(i)
        if pair.phi & b == 0 and pair.eta & b == b:
            nowhere = False
            break
    if codim(pair) != 1:
        return StratumClass(nowhere, Badness.NOT_CODIM1)
    opens = pair.eta & shift_left(profile, pair.phi)
    beta0 = opens.bit_length() - 1
    succ = shift_right(profile, 1 << beta0)
    if succ & zeros == 0:
        return StratumClass(nowhere, Badness.GOOD, beta0)
    i0 = profile.prime_of(beta0)
    b = profile.block_mask(i0)
    if pair.eta & b == b:
        return StratumClass(nowhere, Badness.BAD, beta0, None)
    cur = succ
    j = 0
    while cur & zeros:
        j += 1
        cur = shift_right(profile, cur)
    assert cur & ones, "walk must stop at a One inside the block"
    return StratumClass(nowhere, Badness.BAD, beta0, j)


class FaceCoord(IntEnum):
    ZERO = 0
    ONE = 1
    OPEN = 2


@dataclass(frozen=True)
class Face:
    profile: PrimeProfile
    coords: tuple[FaceCoord, ...]

    def __post_init__(self) -> None:
        if len(self.coords) != self.profile.g:
            raise ValueError(f"face needs {self.profile.g} coordinates")
        object.__setattr__(self, "coords", tuple(FaceCoord(c) for c in self.coords))

    @property
    def dim(self) -> int:
        return sum(1 for c in self.coords if c is FaceCoord.OPEN)

    def mask_of(self, which: FaceCoord) -> int:
        m = 0
        for k, c in enumerate(self.coords):
            if c is which:
                m |= 1 << k
        return m


def face_of_pair(pair: StratumPair) -> Face:
    full = pair.profile.full_mask
    ones = full & ~pair.eta
    zeros = shift_left(pair.profile, full & ~pair.phi)
    coords = []
    for k in range(pair.profile.g):
        bit = 1 << k
        if bit & ones:
            coords.append(FaceCoord.ONE)
        elif bit & zeros:
            coords.append(FaceCoord.ZERO)
        else:
            coords.append(FaceCoord.OPEN)
    return Face(pair.profile, tuple(coords))


def pair_of_face(face: Face) -> StratumPair:
    full = face.profile.full_mask
    zeros = face.mask_of(FaceCoord.ZERO)
    ones = face.mask_of(FaceCoord.ONE)
    eta = full & ~ones
    phi = shift_right(face.profile, full & ~zeros)
    return StratumPair(face.profile, phi, eta)


def flip_face(face: Face, T) -> Face:
    """Swap Zero and One coordinates on the blocks of the primes in T."""
    tset = set(T)
    coords = list(face.coords)
    for i in tset:
        off = face.profile.offsets[i]
        for pos in range(face.profile.f[i]):
            c = coords[off + pos]
            if c is FaceCoord.ZERO:
                coords[off + pos] = FaceCoord.ONE
            elif c is FaceCoord.ONE:
                coords[off + pos] = FaceCoord.ZERO
    return Face(face.profile, tuple(coords))


def vertex_of_primes(profile: PrimeProfile, T) -> Face:
    """Vertex with One on every block of the primes in T, Zero elsewhere."""
    tset = set(T)
    coords = []
    for i in range(profile.n_primes):
        coords.extend([FaceCoord.ONE if i in tset else FaceCoord.ZERO] * profile.f[i])
    return Face(profile, tuple(coords))


def vertex_decomposition(face: Face) -> tuple[tuple[int, ...], tuple[int, ...], tuple[int, ...]]:
    """Split the primes of a vertex into all-Zero, all-One and mixed blocks."""
    if face.dim != 0:
        raise NotAVertex("vertex decomposition needs a 0-dimensional face")
    t0, t1, t2 = [], [], []
    for i in range(face.profile.n_primes):
        off = face.profile.offsets[i]
        block = face.coords[off : off + face.profile.f[i]]
        if all(c is FaceCoord.ZERO for c in block):
            t0.append(i)
        elif all(c is FaceCoord.ONE for c in block):
            t1.append(i)
        else:
            t2.append(i)
    return tuple(t0), tuple(t1), tuple(t2)
