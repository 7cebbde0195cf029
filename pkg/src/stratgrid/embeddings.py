"""Indexing layer: prime profiles and bitmask subsets of the embedding universe.

A profile fixes a rational prime p and a tuple of residue degrees, one per
prime above p.  Embeddings are indexed block-major: all positions of prime 0,
then prime 1, and so on.  Within a block of size f the cyclic successor sigma
sends position k to k+1 mod f.  Subsets of embeddings are plain ints with one
bit per embedding, so set algebra is bit algebra.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass

__all__ = [
    "ProfileError",
    "PrimeProfile",
    "parse_profile",
    "shift_left",
    "shift_right",
    "prime_block",
    "subset_to_indices",
    "indices_to_subset",
]

MAX_G = 64  # masks stay cheap ints; enumeration bounds are tighter and live elsewhere


class ProfileError(ValueError):
    """Malformed or unsupported prime profile."""


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    k = 2
    while k * k <= n:
        if n % k == 0:
            return False
        k += 1
    return True


@dataclass(frozen=True)
class PrimeProfile:
    """Residue-degree profile (p; f_0, ..., f_{m-1}) of the primes above p."""

    p: int
    f: tuple[int, ...]

    def __post_init__(self) -> None:
        if not isinstance(self.p, int) or not _is_prime(self.p):
            raise ProfileError(f"p must be a rational prime, got {self.p!r}")
        if not self.f or any((not isinstance(d, int)) or d < 1 for d in self.f):
            raise ProfileError(f"residue degrees must be positive ints, got {self.f!r}")
        if sum(self.f) > MAX_G:
            raise ProfileError(f"total degree {sum(self.f)} exceeds {MAX_G}")
        object.__setattr__(self, "f", tuple(self.f))

    @property
    def g(self) -> int:
        return sum(self.f)

    @property
    def n_primes(self) -> int:
        return len(self.f)

    @property
    def offsets(self) -> tuple[int, ...]:
        out, acc = [], 0
        for d in self.f:
            out.append(acc)
            acc += d
        return tuple(out)

    @property
    def full_mask(self) -> int:
        return (1 << self.g) - 1

    def block_mask(self, i: int) -> int:
        """Bitmask of all embeddings of prime i."""
        return ((1 << self.f[i]) - 1) << self.offsets[i]

    def index(self, i: int, pos: int) -> int:
        """Global embedding index of position pos within prime i."""
        if not (0 <= i < self.n_primes) or not (0 <= pos < self.f[i]):
            raise IndexError(f"no embedding {i}/{pos} in profile {self}")
        return self.offsets[i] + pos

    def emb(self, k: int) -> tuple[int, int]:
        """Inverse of index: global index -> (prime, position)."""
        if not (0 <= k < self.g):
            raise IndexError(f"embedding index {k} out of range")
        for i, off in enumerate(self.offsets):
            if k < off + self.f[i]:
                return i, k - off
        raise IndexError(k)  # unreachable

    def prime_of(self, k: int) -> int:
        return self.emb(k)[0]

    def label(self, k: int) -> str:
        i, pos = self.emb(k)
        return f"{i}/{pos}"

    def index_of_label(self, s: str) -> int:
        m = re.fullmatch(r"(\d+)/(\d+)", s.strip())
        if not m:
            raise ProfileError(f"bad embedding label {s!r}, expected 'prime/pos'")
        return self.index(int(m.group(1)), int(m.group(2)))

    def to_json_dict(self) -> dict:
        return {"p": self.p, "f": list(self.f)}

    def __str__(self) -> str:
        return f"p={self.p};f={','.join(str(d) for d in self.f)}"


def parse_profile(text: str | dict) -> PrimeProfile:
    """Parse 'p=3;f=2,1,1' or the JSON form {"p": 3, "f": [2, 1, 1]}."""
    if isinstance(text, dict):
        data = text
    else:
        s = text.strip()
        if s.startswith("{"):
            try:
                data = json.loads(s)
            except json.JSONDecodeError as e:
                raise ProfileError(f"bad profile JSON: {e}") from None
        else:
            m = re.fullmatch(r"p\s*=\s*(\d+)\s*;\s*f\s*=\s*(\d+(?:\s*,\s*\d+)*)", s)
            if not m:
                raise ProfileError(f"bad profile {text!r}, expected 'p=P;f=a,b,...'")
            return PrimeProfile(int(m.group(1)), tuple(int(x) for x in m.group(2).split(",")))
    if not isinstance(data, dict) or set(data) != {"p", "f"}:
        raise ProfileError(f"profile JSON needs exactly keys p and f, got {data!r}")
    f = data["f"]
    if not isinstance(f, list):
        raise ProfileError("profile f must be a list")
    return PrimeProfile(data["p"], tuple(f))


def _check_mask(profile: PrimeProfile, mask: int) -> None:
    if not isinstance(mask, int) or mask < 0 or mask & ~profile.full_mask:
        raise ValueError(f"mask {mask!r} not a subset of the {profile.g} embeddings")


def shift_left(profile: PrimeProfile, mask: int) -> int:
    """Predecessor set: k is in the result iff its cyclic successor is in mask.

    Blockwise this rotates each block's bits one position down.
    """
    _check_mask(profile, mask)
    out = 0
    for i, d in enumerate(profile.f):
        off = profile.offsets[i]
        b = (mask >> off) & ((1 << d) - 1)
        b = (b >> 1) | ((b & 1) << (d - 1))
        out |= b << off
    return out


def shift_right(profile: PrimeProfile, mask: int) -> int:
    """Successor set, the inverse of shift_left."""
    _check_mask(profile, mask)
    out = 0
    for i, d in enumerate(profile.f):
        off = profile.offsets[i]
        b = (mask >> off) & ((1 << d) - 1)
        b = ((b << 1) | (b >> (d - 1))) & ((1 << d) - 1)
        out |= b << off
    return out


def prime_block(profile: PrimeProfile, mask: int, i: int) -> int:
    """Restrict a subset to the block of prime i (still in global coordinates)."""
    _check_mask(profile, mask)
    return mask & profile.block_mask(i)


def subset_to_indices(mask: int) -> list[int]:
    out = []
    k = 0
    while mask:
        if mask & 1:
            out.append(k)
        mask >>= 1
        k += 1
    return out


def indices_to_subset(indices) -> int:
    m = 0
    for k in indices:
        m |= 1 << k
    return m
