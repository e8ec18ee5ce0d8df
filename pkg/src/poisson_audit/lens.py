"""Lens spaces L(q; p_1..p_n): closed-geodesic classification and length spectrum.

The deck transformation is the block rotation T with angles 2*pi*p_i/q.  For
each admissible l the rotation exponents split into equivalence classes of
coordinates that T^k rotates by a common angle +-2*pi*l/q for some power k;
each class, together with an orientation, labels one connected family of
closed geodesics of length 2*pi*l/q (plus whole-period iterates).  All
bookkeeping (lengths, class membership, realizers, block signs) is exact
integer arithmetic; floats appear only in presentation helpers and in the
numpy matrices handed to the numeric oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

import numpy as np

from .exactnum import EQ, CosSymbol, compare_cos


def _inverse_mod(a: int, q: int) -> int:
    g, x = _ext_gcd(a % q, q)
    if g != 1:
        raise ValueError(f"{a} is not a unit mod {q}")
    return x % q


def _ext_gcd(a: int, b: int):
    old_r, r = a, b
    old_s, s = 1, 0
    while r:
        quo = old_r // r
        old_r, r = r, old_r - quo * r
        old_s, s = s, old_s - quo * s
    return old_r, old_s


@dataclass(frozen=True)
class LensSpace:
    """L(q; p_1,...,p_n) with q > 2, n >= 2, gcd(p_i, q) = 1.

    Inputs with p_1 != 1 are normalized by multiplying every exponent by the
    inverse of p_1 mod q (a relabeling of the same quotient); the raw input is
    kept in `p_input`.
    """

    q: int
    p: tuple[int, ...]
    p_input: tuple[int, ...] = field(default=(), compare=False)

    def __init__(self, q: int, p):
        p = tuple(int(x) for x in p)
        if q <= 2:
            raise ValueError("q must be > 2")
        if len(p) < 2:
            raise ValueError("need at least two rotation exponents (dimension >= 3)")
        reduced = tuple(x % q for x in p)
        if any(x == 0 or math.gcd(x, q) != 1 for x in reduced):
            raise ValueError(f"every p_i must be a unit mod {q}: got {p}")
        object.__setattr__(self, "p_input", reduced)
        if reduced[0] != 1:
            u = _inverse_mod(reduced[0], q)
            reduced = tuple((x * u) % q for x in reduced)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "p", reduced)

    @property
    def n(self) -> int:
        return len(self.p)

    @property
    def dim(self) -> int:
        return 2 * self.n - 1

    @property
    def is_homogeneous(self) -> bool:
        return all(x == 1 or x == self.q - 1 for x in self.p)

    @property
    def period_units(self) -> int:
        """Length of a full flow period in units of 2*pi/q: q when q is odd
        (period 2*pi), q/2 when q is even (period pi)."""
        return self.q if self.q % 2 else self.q // 2

    def valid_l(self) -> range:
        return range(1, self.q) if self.q % 2 else range(1, self.q // 2)

    def rotation_matrix(self, k: int = 1) -> np.ndarray:
        """T^k as a 2n x 2n float matrix."""
        out = np.zeros((2 * self.n, 2 * self.n))
        for i, pi in enumerate(self.p):
            a = 2 * math.pi * pi * k / self.q
            c, s = math.cos(a), math.sin(a)
            out[2 * i: 2 * i + 2, 2 * i: 2 * i + 2] = [[c, -s], [s, c]]
        return out

    def __repr__(self):
        return f"L({self.q};{','.join(map(str, self.p))})"


@dataclass(frozen=True)
class EquivPartition:
    """Partition of the rotation exponents for a fixed l, with one canonical
    realizer per class.

    Index i sits with index j iff p_i * k_j = +-l (mod q) for k_j the unique
    solution of p_j * k_j = l; equivalently p_i = +-p_j (mod q / gcd(q, l)).
    The canonical realizer is the representative in 1..floor(q/2); the other
    choice q - k_r is the time-reversed orientation.
    """

    lens: LensSpace
    l: int
    classes: tuple[tuple[int, ...], ...]
    realizers: tuple[int, ...]

    @property
    def class_sizes(self) -> tuple[int, ...]:
        return tuple(len(c) for c in self.classes)

    def class_of(self, index: int) -> int:
        for r, cls in enumerate(self.classes):
            if index in cls:
                return r
        raise ValueError(f"index {index} not in partition")


@lru_cache(maxsize=4096)
def _partition_cached(q: int, p: tuple[int, ...], l: int) -> tuple[tuple[tuple[int, ...], ...], tuple[int, ...]]:
    g = math.gcd(q, l)
    qg = q // g
    classes: list[list[int]] = []
    keys: list[int] = []
    for i, pi in enumerate(p):
        key = min(pi % qg, (-pi) % qg)
        for r, k in enumerate(keys):
            if k == key:
                classes[r].append(i)
                break
        else:
            keys.append(key)
            classes.append([i])
    realizers = []
    for cls in classes:
        k = (_inverse_mod(p[cls[0]], q) * l) % q
        realizers.append(min(k, q - k))
    return tuple(tuple(c) for c in classes), tuple(realizers)


def partition(lens: LensSpace, l: int) -> EquivPartition:
    """Equivalence classes of rotation exponents at angle parameter l."""
    if l not in lens.valid_l():
        raise ValueError(f"l={l} outside valid range for q={lens.q}")
    classes, realizers = _partition_cached(lens.q, lens.p, l)
    return EquivPartition(lens, l, classes, realizers)


def _sin_side(a: int, q: int) -> int:
    """Sign of sin(2*pi*a/q) from the residue: +1 on (0, q/2), -1 on (q/2, q)."""
    a %= q
    if a == 0 or 2 * a == q:
        raise ValueError("sine vanishes at this residue")
    return 1 if 2 * a < q else -1


def j_operator(part: EquivPartition, class_index: int, orientation: int = +1) -> np.ndarray:
    """The signed 90-degree block rotation giving initial directions of the
    short geodesics for this partition.

    Block i carries sign sgn(sin(2*pi*p_i*k_i/q)) * sgn(sin(2*pi*l/q)), where
    k_i is the canonical realizer of the class of i; orientation -1 negates
    the whole operator (time reversal).  Entries are exact integers.
    """
    lens, l, q = part.lens, part.l, part.lens.q
    if not 0 <= class_index < len(part.classes):
        raise ValueError("class index out of range")
    if orientation not in (+1, -1):
        raise ValueError("orientation must be +1 or -1")
    out = np.zeros((2 * lens.n, 2 * lens.n), dtype=int)
    s_l = _sin_side(l, q)
    block = np.array([[0, -1], [1, 0]], dtype=int)
    for r, cls in enumerate(part.classes):
        k = part.realizers[r]
        for i in cls:
            sign = _sin_side(lens.p[i] * k, q) * s_l * orientation
            out[2 * i: 2 * i + 2, 2 * i: 2 * i + 2] = sign * block
    return out


@dataclass(frozen=True)
class GeodesicComponent:
    """One connected component of the fixed set of the time-tau flow coming
    from a short geodesic family: an equivalence class, an orientation, and a
    number of whole flow periods (winding)."""

    lens: LensSpace
    l: int
    winding: int
    class_index: int
    orientation: int  # +1 or -1
    members: tuple[int, ...]
    realizer_canonical: int  # class realizer in 1..floor(q/2)

    @property
    def m(self) -> int:
        return len(self.members)

    @property
    def dim(self) -> int:
        return 2 * self.m - 1

    @property
    def realizer_k(self) -> int:
        """Realizer matching this orientation."""
        k = self.realizer_canonical
        return k if self.orientation == +1 else self.lens.q - k

    @property
    def tau_units(self) -> int:
        """Exact length in units of 2*pi/q."""
        return self.winding * self.lens.period_units + self.l

    @property
    def tau(self) -> float:
        return 2 * math.pi * self.tau_units / self.lens.q

    @property
    def deck_exponent(self) -> int:
        """Exponent k with T^k x = cos(tau) x + sin(tau) y along the family.

        For even q each extra winding multiplies the deck element by the
        order-2 rotation T^(q/2) = -Id; for odd q iterates reuse the same k.
        """
        q = self.lens.q
        k = self.realizer_k
        if q % 2 == 0 and self.winding % 2 == 1:
            k = (k + q // 2) % q
        return k

    @property
    def coordinate_indices(self) -> tuple[int, ...]:
        """Ambient coordinates (0-based) of the class planes."""
        return tuple(i for mm in self.members for i in (2 * mm, 2 * mm + 1))

    def partition(self) -> EquivPartition:
        return partition(self.lens, self.l)

    def j_matrix(self) -> np.ndarray:
        """Oriented J operator for this component (integer entries)."""
        return j_operator(self.partition(), self.class_index, self.orientation)

    def random_adapted_point(self, rng: np.random.Generator) -> np.ndarray:
        """Uniform random point on the adapted subsphere, as an ambient vector."""
        x = np.zeros(2 * self.lens.n)
        w = rng.standard_normal(2 * self.m)
        w /= np.linalg.norm(w)
        x[list(self.coordinate_indices)] = w
        return x

    def __repr__(self):
        sign = "+" if self.orientation > 0 else "-"
        return (f"Component({self.lens}, l={self.l}, w={self.winding}, "
                f"class={self.members}, {sign})")


@dataclass(frozen=True)
class FullFlowComponent:
    """Fixed set of a whole-period iterate: all of the unit tangent bundle."""

    lens: LensSpace
    multiple: int  # number of full periods

    @property
    def dim(self) -> int:
        return 4 * self.lens.n - 3

    @property
    def tau_units(self) -> int:
        return self.multiple * self.lens.period_units

    @property
    def tau(self) -> float:
        return 2 * math.pi * self.tau_units / self.lens.q


@dataclass(frozen=True)
class LengthSpectrumEntry:
    tau_units: int  # exact length in units of 2*pi/q
    kind: str  # "short" or "full"
    components: tuple

    @property
    def tau(self) -> float:
        lens = self.components[0].lens
        return 2 * math.pi * self.tau_units / lens.q

    @property
    def l(self) -> Optional[int]:
        if self.kind != "short":
            return None
        return self.components[0].l

    @property
    def winding(self) -> Optional[int]:
        if self.kind != "short":
            return None
        return self.components[0].winding


def components_at(lens: LensSpace, l: int, winding: int = 0) -> tuple[GeodesicComponent, ...]:
    """Both orientations of every class at angle parameter l, fixed winding."""
    part = partition(lens, l)
    out = []
    for r, cls in enumerate(part.classes):
        for orientation in (+1, -1):
            out.append(GeodesicComponent(
                lens=lens, l=l, winding=winding, class_index=r,
                orientation=orientation, members=cls,
                realizer_canonical=part.realizers[r]))
    return tuple(out)


def length_spectrum(lens: LensSpace, max_length: float) -> list[LengthSpectrumEntry]:
    """All closed-geodesic lengths up to max_length, each with its fixed-set
    components.

    Every positive multiple of 2*pi/q below the cutoff occurs: multiples of
    the flow period give whole-bundle entries, everything else is the unique
    (l, winding) splitting.  Entries are deduplicated by the exact integer
    tau / (2*pi/q) and sorted.
    """
    if max_length <= 0:
        raise ValueError("max_length must be positive")
    q = lens.q
    c_max = int(math.floor(max_length * q / (2 * math.pi) + 1e-9))
    period = lens.period_units
    entries = []
    for c in range(1, c_max + 1):
        if c % period == 0:
            comp = FullFlowComponent(lens=lens, multiple=c // period)
            entries.append(LengthSpectrumEntry(tau_units=c, kind="full", components=(comp,)))
        else:
            l = c % period
            winding = c // period
            entries.append(LengthSpectrumEntry(
                tau_units=c, kind="short",
                components=components_at(lens, l, winding)))
    return entries


def is_primitive(c: GeodesicComponent) -> bool:
    """Whether the geodesics of this winding-0 component are primitive.

    The family of length 2*pi*l/q through a class S is an iterate exactly when
    some proper divisor l' of l keeps all of S inside a single class at
    parameter l'; the initial directions then automatically agree (a realizer
    for the divisor class, scaled by l/l', realizes S with matching block
    signs), so the divisor test is the whole criterion.
    """
    if c.winding != 0:
        raise ValueError("primitivity is only defined for winding-0 components")
    members = set(c.members)
    for lp in range(1, c.l):
        if c.l % lp:
            continue
        part = partition(c.lens, lp)
        if any(members <= set(cls) for cls in part.classes):
            return False
    return True


def check_partition_realizer(part: EquivPartition) -> bool:
    """Every member of every class must satisfy cos(2*pi*p_i*k_r/q) =
    cos(2*pi*l/q) exactly (integer comparison)."""
    q = part.lens.q
    target = CosSymbol(part.l, q)
    for cls, k in zip(part.classes, part.realizers):
        for i in cls:
            if compare_cos(CosSymbol(part.lens.p[i] * k, q), target) != EQ:
                return False
    return True
