"""Exact cyclotomic arithmetic, characters of small finite rings, Gauss sums,
and the coefficientwise twist identity for companion coefficient families.

Everything is computed in rings Z[x]/Phi_m(x) with integer coefficients; no
floating point and no division.  The one inverse the twist identity would
need, 1/W(psi), is removed by cross-multiplying both sides.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import product
from math import gcd, lcm
from random import Random

from .embeddings import _is_prime

__all__ = [
    "ConductorTooLarge",
    "InconsistentSeed",
    "TrivialCharacter",
    "cyclotomic_poly",
    "CyclotomicInt",
    "conductor",
    "GF",
    "UnitGroup",
    "FieldChar",
    "UnitChar",
    "all_field_chars",
    "all_unit_chars",
    "gauss_sum",
    "twisted_sum",
    "unit_twisted_sum",
    "CoeffFamily",
    "TwistSeed",
    "random_twist_seed",
    "build_companion_coeffs",
    "TwistReport",
    "verify_twist_identity",
    "COEFF_CAP",
]

COEFF_CAP = 1000


class ConductorTooLarge(ValueError):
    """Requested cyclotomic ring needs more than COEFF_CAP coefficients."""


class InconsistentSeed(ValueError):
    """Seed assigns values outside its allowed support or misses indices."""


class TrivialCharacter(ValueError):
    """Operation needs a nontrivial character."""


# ---------------------------------------------------------------------------
# integer polynomials (dense ascending coefficient tuples)


def _poly_trim(c: list[int]) -> tuple[int, ...]:
    while c and c[-1] == 0:
        c.pop()
    return tuple(c)


def _poly_mul(a, b) -> tuple[int, ...]:
    if not a or not b:
        return ()
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return _poly_trim(out)


def _poly_rem(a, b) -> tuple[int, ...]:
    """Remainder of a by monic b, exact over the integers."""
    a = list(a)
    db = len(b) - 1
    assert b[-1] == 1
    while len(a) - 1 >= db and a:
        lead = a[-1]
        if lead:
            shift = len(a) - 1 - db
            for j, y in enumerate(b):
                a[shift + j] -= lead * y
        a.pop()
    return _poly_trim(a)


def _poly_div_exact(a, b) -> tuple[int, ...]:
    """Quotient of a by monic b when the division is exact."""
    a = list(a)
    db = len(b) - 1
    q = [0] * (len(a) - db)
    while len(a) - 1 >= db and a:
        lead = a[-1]
        shift = len(a) - 1 - db
        q[shift] = lead
        if lead:
            for j, y in enumerate(b):
                a[shift + j] -= lead * y
        while a and a[-1] == 0:
            a.pop()
    assert not a, "division was not exact"
    return _poly_trim(q)


def _divisors(m: int) -> list[int]:
    return [d for d in range(1, m + 1) if m % d == 0]


@lru_cache(maxsize=None)
def cyclotomic_poly(m: int) -> tuple[int, ...]:
    """Coefficients of the m-th cyclotomic polynomial, ascending, exact."""
    if m < 1:
        raise ValueError("conductor must be >= 1")
    if m == 1:
        return (-1, 1)
    num = tuple([-1] + [0] * (m - 1) + [1])  # x^m - 1
    for d in _divisors(m)[:-1]:
        num = _poly_div_exact(num, cyclotomic_poly(d))
    return num


def _phi_deg(m: int) -> int:
    return len(cyclotomic_poly(m)) - 1


@dataclass(frozen=True)
class CyclotomicInt:
    """Element of Z[zeta_m], stored reduced modulo Phi_m."""

    m: int
    coeffs: tuple[int, ...]

    @staticmethod
    def make(m: int, coeffs) -> "CyclotomicInt":
        deg = _phi_deg(m)
        red = list(_poly_rem(tuple(coeffs), cyclotomic_poly(m)))
        red += [0] * (deg - len(red))
        return CyclotomicInt(m, tuple(red))

    @staticmethod
    def from_int(m: int, c: int) -> "CyclotomicInt":
        return CyclotomicInt.make(m, (c,))

    @staticmethod
    def zeta(m: int, k: int = 1) -> "CyclotomicInt":
        k %= m
        return CyclotomicInt.make(m, (0,) * k + (1,))

    def _coerce(self, other) -> "CyclotomicInt":
        if isinstance(other, int):
            return CyclotomicInt.from_int(self.m, other)
        if isinstance(other, CyclotomicInt):
            if other.m != self.m:
                raise ValueError(f"conductor mismatch: {self.m} vs {other.m}")
            return other
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return CyclotomicInt(self.m, tuple(x + y for x, y in zip(self.coeffs, o.coeffs)))

    __radd__ = __add__

    def __neg__(self):
        return CyclotomicInt(self.m, tuple(-x for x in self.coeffs))

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return CyclotomicInt.make(self.m, _poly_mul(self.coeffs, o.coeffs))

    __rmul__ = __mul__

    def __pow__(self, e: int):
        if e < 0:
            raise ValueError("negative powers leave the integer ring")
        out = CyclotomicInt.from_int(self.m, 1)
        base = self
        while e:
            if e & 1:
                out = out * base
            base = base * base
            e >>= 1
        return out

    def __eq__(self, other):
        if isinstance(other, int):
            return self == CyclotomicInt.from_int(self.m, other)
        if isinstance(other, CyclotomicInt):
            return self.m == other.m and self.coeffs == other.coeffs
        return NotImplemented

    def __hash__(self):
        return hash((self.m, self.coeffs))

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coeffs)

    def galois(self, t: int) -> "CyclotomicInt":
        """Image under zeta_m -> zeta_m^t, for t prime to m."""
        if gcd(t, self.m) != 1:
            raise ValueError("galois exponent must be prime to the conductor")
        out = [0] * self.m
        for i, c in enumerate(self.coeffs):
            out[(i * t) % self.m] += c
        return CyclotomicInt.make(self.m, out)

    def embed(self, M: int) -> "CyclotomicInt":
        """Image in the conductor-M ring via zeta_m = zeta_M^(M/m)."""
        if M % self.m != 0:
            raise ValueError(f"{self.m} does not divide {M}")
        step = M // self.m
        out = [0] * (max((len(self.coeffs) - 1) * step, 0) + 1)
        for i, c in enumerate(self.coeffs):
            out[i * step] += c
        return CyclotomicInt.make(M, out)

    def __str__(self):
        terms = [
            (f"{c}" if i == 0 else f"{c}*z^{i}")
            for i, c in enumerate(self.coeffs)
            if c
        ]
        return " + ".join(terms) if terms else "0"


def conductor(*orders: int, cap: int = COEFF_CAP) -> int:
    """lcm of the given orders, rejected when the ring would exceed the cap."""
    M = 1
    for d in orders:
        M = lcm(M, d)
    if _phi_deg(M) > cap:
        raise ConductorTooLarge(f"conductor {M} needs {_phi_deg(M)} coefficients")
    return M


# ---------------------------------------------------------------------------
# small finite fields


class GF:
    """F_q for q = p^r, r <= 3, with deterministic tables.

    Element of index i has the base-p digits of i as coefficient tuple, the
    constant coefficient least significant; index 0 is zero, index 1 is one,
    and for prime q the index equals the residue.
    """

    def __init__(self, q: int):
        p, r = _prime_power(q)
        self.q, self.p, self.r = q, p, r
        if r > 3:
            raise ValueError("only degrees up to 3 are supported")
        self.modulus = _find_irreducible(p, r)
        self.elements = [tuple(reversed(t)) for t in product(range(p), repeat=r)]
        # reversed so the constant coordinate varies fastest: index 1 is one
        self._index = {t: i for i, t in enumerate(self.elements)}
        self.gen = self._find_generator()
        self.exp = [1]
        for _ in range(q - 2):
            self.exp.append(self.mul(self.exp[-1], self.gen))
        self.dlog = {e: i for i, e in enumerate(self.exp)}

    def add(self, i: int, j: int) -> int:
        a, b = self.elements[i], self.elements[j]
        return self._index[tuple((x + y) % self.p for x, y in zip(a, b))]

    def neg(self, i: int) -> int:
        return self._index[tuple((-x) % self.p for x in self.elements[i])]

    def mul(self, i: int, j: int) -> int:
        if i == 0 or j == 0:
            return 0
        a, b = self.elements[i], self.elements[j]
        prod = [0] * (2 * self.r - 1)
        for s, x in enumerate(a):
            for t, y in enumerate(b):
                prod[s + t] += x * y
        for k in range(len(prod) - 1, self.r - 1, -1):
            c = prod[k] % self.p
            if c:
                for t, y in enumerate(self.modulus[:-1]):
                    prod[k - self.r + t] -= c * y
            prod[k] = 0
        return self._index[tuple(c % self.p for c in prod[: self.r])]

    def pow(self, i: int, e: int) -> int:
        if i == 0:
            return 0 if e else 1
        return self.exp[(self.dlog[i] * e) % (self.q - 1)]

    def trace(self, i: int) -> int:
        acc = 0
        cur = i
        for _ in range(self.r):
            acc = self.add(acc, cur)
            cur = self.pow(cur, self.p)
        t = self.elements[acc]
        assert all(c == 0 for c in t[1:])
        return t[0]

    def _find_generator(self) -> int:
        for i in range(1, self.q):
            order, cur = 1, i
            while cur != 1:
                cur = self.mul(cur, i)
                order += 1
            if order == self.q - 1:
                return i
        raise AssertionError("no generator found")


def _prime_power(q: int) -> tuple[int, int]:
    for p in range(2, q + 1):
        if _is_prime(p):
            r, qq = 0, q
            while qq % p == 0:
                qq //= p
                r += 1
            if qq == 1 and r >= 1:
                return p, r
            if q % p == 0:
                break
    raise ValueError(f"{q} is not a prime power")


def _find_irreducible(p: int, r: int) -> tuple[int, ...]:
    """Smallest monic degree-r polynomial over F_p with no roots.

    Rootlessness is equivalent to irreducibility for r in {2, 3}.
    """
    if r == 1:
        return (0, 1)
    for tail in product(range(p), repeat=r):
        poly = tail + (1,)
        if poly[0] == 0:
            continue
        if all(
            sum(c * a**k for k, c in enumerate(poly)) % p != 0 for a in range(p)
        ):
            return poly
    raise AssertionError("no irreducible polynomial found")


# ---------------------------------------------------------------------------
# unit groups of Z/n


class UnitGroup:
    """(Z/n)^x with a fixed generator decomposition via prime powers.

    For n = 1 the group is trivial with single element 0 (= 1 mod 1).
    """

    def __init__(self, n: int):
        if n < 1:
            raise ValueError("modulus must be >= 1")
        self.n = n
        self.units = [u for u in range(n) if gcd(u, n) == 1] if n > 1 else [0]
        self.gens: list[tuple[int, int]] = []
        for pe, p in _prime_power_factors(n):
            for g_local, d in _local_unit_gens(p, pe):
                self.gens.append((_crt_lift(g_local, pe, n), d))
        self._dlog: dict[int, tuple[int, ...]] = {}
        for exps in product(*[range(d) for _, d in self.gens]):
            u = 1 % n
            for (g, _), e in zip(self.gens, exps):
                u = (u * pow(g, e, n)) % n if n > 1 else 0
            self._dlog.setdefault(u, exps)
        assert len(self._dlog) == len(self.units)

    def dlog(self, u: int) -> tuple[int, ...]:
        return self._dlog[u % self.n if self.n > 1 else 0]

    @property
    def exponent(self) -> int:
        out = 1
        for _, d in self.gens:
            out = lcm(out, d)
        return out


def _prime_power_factors(n: int) -> list[tuple[int, int]]:
    out = []
    m = n
    for p in range(2, n + 1):
        if m % p == 0:
            pe = 1
            while m % p == 0:
                m //= p
                pe *= p
            out.append((pe, p))
    return out


def _local_unit_gens(p: int, pe: int) -> list[tuple[int, int]]:
    if p == 2:
        if pe == 2:
            return []
        if pe == 4:
            return [(3, 2)]
        return [(pe - 1, 2), (5, pe // 4)]
    phi = pe - pe // p
    for g in range(2, pe):
        if gcd(g, p) == 1 and _mult_order(g, pe) == phi:
            return [(g, phi)]
    raise AssertionError("no primitive root found")


def _mult_order(g: int, m: int) -> int:
    order, cur = 1, g % m
    while cur != 1:
        cur = (cur * g) % m
        order += 1
    return order


def _crt_lift(g: int, pe: int, n: int) -> int:
    """Unit congruent to g mod pe and to 1 modulo the complement."""
    rest = n // pe
    if rest == 1:
        return g % n
    inv = pow(pe, -1, rest)
    return (g + pe * ((1 - g) * inv % rest)) % n


# ---------------------------------------------------------------------------
# multiplicative characters


@dataclass(frozen=True)
class FieldChar:
    """Character of F_q^x: the fixed generator maps to zeta_(q-1)^exp."""

    field: GF
    exp: int

    @property
    def order(self) -> int:
        d = self.field.q - 1
        return d // gcd(self.exp % d, d)

    def is_trivial(self) -> bool:
        return self.exp % (self.field.q - 1) == 0

    def inverse(self) -> "FieldChar":
        return FieldChar(self.field, (-self.exp) % (self.field.q - 1))

    def value(self, i: int, M: int) -> CyclotomicInt:
        """Value at the nonzero element of index i, in the conductor-M ring."""
        if i == 0:
            raise ValueError("character not defined at zero")
        d = self.field.q - 1
        if M % self.order:
            raise ValueError("conductor does not contain the character values")
        e = (self.field.dlog[i] * self.exp) % d
        num = e * self.order // d  # exact: d/order divides e
        return CyclotomicInt.zeta(M, num * (M // self.order))

    def at_minus_one(self, M: int) -> CyclotomicInt:
        return self.value(self.field.neg(1), M)


@dataclass(frozen=True)
class UnitChar:
    """Character of (Z/n)^x given by exponents along the fixed generators."""

    group: UnitGroup
    exps: tuple[int, ...]

    @property
    def order(self) -> int:
        out = 1
        for (_, d), k in zip(self.group.gens, self.exps):
            out = lcm(out, d // gcd(k % d, d))
        return out

    def is_trivial(self) -> bool:
        return all(
            k % d == 0 for (_, d), k in zip(self.group.gens, self.exps)
        )

    def inverse(self) -> "UnitChar":
        return UnitChar(
            self.group,
            tuple((-k) % d for (_, d), k in zip(self.group.gens, self.exps)),
        )

    def value(self, u: int, M: int) -> CyclotomicInt:
        e = 0
        for (_, d), k, x in zip(self.group.gens, self.exps, self.group.dlog(u)):
            if M % d:
                raise ValueError("conductor does not contain the character values")
            e += x * k * (M // d)
        return CyclotomicInt.zeta(M, e % M)


def all_field_chars(field: GF):
    return [FieldChar(field, k) for k in range(field.q - 1)]


def all_unit_chars(group: UnitGroup):
    return [
        UnitChar(group, exps)
        for exps in product(*[range(d) for _, d in group.gens])
    ]


# ---------------------------------------------------------------------------
# Gauss sums


def gauss_sum(psi: FieldChar, M: int | None = None) -> CyclotomicInt:
    """Sum of psi(j) zeta_p^Tr(j) over nonzero j, in conductor lcm(p, ord psi)."""
    field = psi.field
    if M is None:
        M = conductor(field.p, psi.order)
    out = CyclotomicInt.from_int(M, 0)
    for j in range(1, field.q):
        out = out + psi.value(j, M) * CyclotomicInt.zeta(M, field.trace(j) * (M // field.p))
    return out


def twisted_sum(psi: FieldChar, t: int, M: int | None = None) -> CyclotomicInt:
    """Sum of psi(j) zeta_p^Tr(jt); equals psi^-1(t) W(psi) for t != 0, else 0."""
    field = psi.field
    if M is None:
        M = conductor(field.p, psi.order)
    out = CyclotomicInt.from_int(M, 0)
    for j in range(1, field.q):
        tr = field.trace(field.mul(j, t))
        out = out + psi.value(j, M) * CyclotomicInt.zeta(M, tr * (M // field.p))
    return out


def unit_twisted_sum(chi: UnitChar, v: int, M: int) -> CyclotomicInt:
    """Sum of chi(j) zeta_n^(jv) over units j of Z/n."""
    n = chi.group.n
    out = CyclotomicInt.from_int(M, 0)
    for j in chi.group.units:
        zeta_pow = (
            CyclotomicInt.zeta(M, (j * v % n) * (M // n))
            if n > 1
            else CyclotomicInt.from_int(M, 1)
        )
        out = out + chi.value(j, M) * zeta_pow
    return out


# ---------------------------------------------------------------------------
# companion coefficient families and the twist identity


@dataclass(frozen=True)
class CoeffFamily:
    """Coefficients over the index group F_q x Z/n, plus the reduced level.

    `full` maps (element index of F_q, residue mod n) to a coefficient; the
    reduced-level map enters the scaling relations at divisible indices.
    Indices with a non-unit second coordinate carry coefficient zero.
    """

    q: int
    n: int
    full: dict
    reduced: dict

    def at(self, u: int, v: int) -> CyclotomicInt:
        return self.full[(u, v)]


@dataclass(frozen=True)
class TwistSeed:
    """Free data: b on (u != 0, v unit) and the reduced family b0 on units."""

    b_full: dict
    b_reduced: dict


def random_twist_seed(field: GF, group: UnitGroup, M: int, seed: int) -> TwistSeed:
    rng = Random(seed)
    b_full = {}
    for u in range(1, field.q):
        for v in group.units:
            b_full[(u, v)] = rng.randint(1, 9) * CyclotomicInt.zeta(M, rng.randrange(M))
    b_reduced = {
        v: rng.randint(1, 9) * CyclotomicInt.zeta(M, rng.randrange(M))
        for v in group.units
    }
    return TwistSeed(b_full, b_reduced)


def _scalar(x, M: int) -> CyclotomicInt:
    """Coerce an int or CyclotomicInt scalar into the conductor-M ring."""
    if isinstance(x, int):
        return CyclotomicInt.from_int(M, x)
    return x.embed(M)


def build_companion_coeffs(
    field: GF,
    group: UnitGroup,
    psi_p: FieldChar,
    psi_n: UnitChar,
    r,
    s,
    C,
    seed: TwistSeed,
    M: int | None = None,
) -> tuple[CoeffFamily, CoeffFamily]:
    """Extend a seed to the companion pair (a, b) by the scaling relations.

    b carries the seed on full-order indices and s times the reduced family on
    divisible ones; a is C psi_p(u) psi_n(v) b(u, v) at full order and r times
    the reduced a-family at divisible indices, zero at non-unit v throughout.
    The scalars r, s, C may be ints or CyclotomicInt values.
    """
    if M is None:
        M = conductor(field.p, field.q - 1, group.n, group.exponent)
    q, n = field.q, group.n
    units = set(group.units)
    want = {(u, v) for u in range(1, q) for v in group.units}
    if set(seed.b_full) != want or set(seed.b_reduced) != units:
        raise InconsistentSeed("seed support must be exactly the full-order indices")
    rc, sc, Cc = _scalar(r, M), _scalar(s, M), _scalar(C, M)
    zero = CyclotomicInt.from_int(M, 0)
    b_full, a_full = {}, {}
    a_reduced = {v: Cc * psi_n.value(v, M) * seed.b_reduced[v].embed(M) for v in units}
    for u in range(q):
        for v in range(n):
            if v not in units:
                b_full[(u, v)] = zero
                a_full[(u, v)] = zero
            elif u == 0:
                b_full[(u, v)] = sc * seed.b_reduced[v].embed(M)
                a_full[(u, v)] = rc * a_reduced[v]
            else:
                bval = seed.b_full[(u, v)].embed(M)
                b_full[(u, v)] = bval
                a_full[(u, v)] = Cc * psi_p.value(u, M) * psi_n.value(v, M) * bval
    b_reduced = {v: seed.b_reduced[v].embed(M) for v in units}
    return (
        CoeffFamily(q, n, a_full, a_reduced),
        CoeffFamily(q, n, b_full, b_reduced),
    )


@dataclass(frozen=True)
class TwistReport:
    passed: bool
    mismatch_index: tuple | None
    conductor: int

    def to_json_dict(self) -> dict:
        return {
            "pass": self.passed,
            "mismatch_index": list(self.mismatch_index)
            if self.mismatch_index is not None
            else None,
            "conductor": self.conductor,
        }


def verify_twist_identity(
    field: GF,
    group: UnitGroup,
    psi_p: FieldChar,
    psi_n: UnitChar,
    r,
    s,
    C,
    seed: TwistSeed,
    corrupt: bool = False,
) -> TwistReport:
    """Check the cross-multiplied twist identity coefficientwise.

    For every index (u, v):
        W(psi_n^-1) * [sum_j psi_p(j) zeta_p^Tr(ju)] * a(u,v)
          = C * W(psi_p) * [S_n(v) * b(u,v) - s * (u == 0) * S_n(v) * b0(v)]
    with S_n(v) the psi_n^-1-twisted sum over units.  With `corrupt` a single
    b-coefficient is perturbed after a was built; the report then names the
    first index where the sides differ.
    """
    if psi_p.is_trivial():
        raise TrivialCharacter("the identity degenerates for trivial psi_p")
    M = conductor(field.p, field.q - 1, group.n, group.exponent)
    a, b = build_companion_coeffs(field, group, psi_p, psi_n, r, s, C, seed, M)
    sc, Cc = _scalar(s, M), _scalar(C, M)
    b_full = dict(b.full)
    if corrupt:
        if Cc.is_zero():
            raise ValueError("corruption is invisible when C is zero")
        target = _detectable_index(group, psi_n, M)
        b_full[target] = b_full[target] + 1
    w_n_inv = unit_twisted_sum(psi_n.inverse(), 1 % group.n, M)
    w_p = gauss_sum(psi_p, M)
    s_n = {v: unit_twisted_sum(psi_n.inverse(), v, M) for v in range(group.n)}
    mismatch = None
    for u in range(field.q):
        for v in range(group.n):
            lhs = w_n_inv * twisted_sum(psi_p, u, M) * a.at(u, v)
            core = s_n[v] * b_full[(u, v)]
            if u == 0 and v in b.reduced:
                core = core - sc * s_n[v] * b.reduced[v]
            rhs = Cc * w_p * core
            if lhs != rhs:
                mismatch = (u, v)
                break
        if mismatch:
            break
    return TwistReport(mismatch is None, mismatch, M)


def _detectable_index(group: UnitGroup, psi_n: UnitChar, M: int):
    """First full-order index whose perturbation the identity can see."""
    for v in group.units:
        if not unit_twisted_sum(psi_n.inverse(), v, M).is_zero():
            return (1, v)
    raise ValueError("every unit twisted sum vanishes; corruption would be invisible")
