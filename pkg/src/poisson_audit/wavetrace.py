"""Leading wave invariants and exact cancellation decisions.

For a clean length tau the order of the wave-trace singularity is governed by
the signed sum of leading densities over the fixed-set components of maximal
dimension.  On a lens space every such component at a short length shares the
class size m and the length, so the sum splits into a strictly positive common
factor times

    sum_j sign_j * prod_{i outside class_j} |cos(2*pi*k_j*p_i/q) - cos(tau)|^(-1),

and whether that vanishes is decided exactly in Q(zeta_q): resolve each
absolute value by the integer cosine comparison, clear denominators, and run
the canonical zero test.  Floats never participate in the decision.

The closed-form density scalar carried by each component is

    (1/sqrt(tau)) * (2*|sin tau|)^(-(m-1)) * prod 2|cos(2*pi*k*p_i/q) - cos tau|^(-1),

which the numeric frame/determinant oracle reproduces to 1e-9 (the constant in
front of the |sin| power follows from the per-vector determinant factors of
the transported frame; see tests).
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

from .exactnum import (
    EQ,
    CosSymbol,
    CycloNumber,
    compare_cos,
    two_abs_cos_diff_exact,
)
from .lens import (
    FullFlowComponent,
    GeodesicComponent,
    LengthSpectrumEntry,
    LensSpace,
    components_at,
    length_spectrum,
)
from .morse import component_index


def sphere_volume(m: int) -> float:
    """vol(S^(2m-1)) = 2*pi^m / (m-1)!."""
    return 2 * math.pi ** m / math.factorial(m - 1)


def sphere_volume_symbol(m: int) -> str:
    return f"2*pi^{m}/{m - 1}!"


@dataclass(frozen=True)
class DensityScalar:
    """Constant value of the canonical density against the Riemannian density
    on one fixed-set component, as an exact factor list plus a float."""

    q: int
    l: int
    tau_units: int
    m: int
    outside_factors: tuple[tuple[int, int], ...]  # (plane index, angle residue a_i)

    @property
    def tau(self) -> float:
        return 2 * math.pi * self.tau_units / self.q

    @property
    def float_value(self) -> float:
        tau = self.tau
        cos_tau = math.cos(2 * math.pi * self.l / self.q)
        sin_tau = abs(math.sin(2 * math.pi * self.l / self.q))
        value = tau ** -0.5 * (2 * sin_tau) ** (-(self.m - 1))
        for _, a in self.outside_factors:
            value /= 2 * abs(math.cos(2 * math.pi * a / self.q) - cos_tau)
        return value

    def symbolic(self) -> dict:
        return {
            "tau_units": self.tau_units,
            "sqrt_tau_power": -1,
            "two_abs_sin_tau_power": -(self.m - 1),
            "outside_factors": [
                {"plane": i, "angle_residue": a, "tau_residue": self.l}
                for i, a in self.outside_factors
            ],
        }


def dg_scalar(c: GeodesicComponent) -> DensityScalar:
    """Density scalar of a short-geodesic component.

    Independent of orientation: the realizer flip k <-> q-k negates every
    angle residue, fixing all cosines.
    """
    if isinstance(c, FullFlowComponent):
        raise ValueError("density scalar is defined on short-geodesic components")
    lens, q = c.lens, c.lens.q
    k = c.realizer_canonical
    outside = tuple(
        (i, (lens.p[i] * k) % q)
        for i in range(lens.n)
        if i not in c.members
    )
    for i, a in outside:
        if compare_cos(CosSymbol(a, q), CosSymbol(c.l, q)) == EQ:
            raise AssertionError(
                f"plane {i} outside the class matches the class cosine; "
                "partition invariant violated")
    return DensityScalar(q=q, l=c.l, tau_units=c.tau_units, m=c.m, outside_factors=outside)


def component_volume(c: GeodesicComponent) -> float:
    """Riemannian volume of the component (Sasaki metric on the unit bundle).

    The component is the image of the adapted sphere S^(2m-1) under
    x -> (x, Jx), divided by the free deck action of order q.  The flow
    direction is horizontal of norm 1 while each of the remaining 2m-2
    directions picks up a vertical copy, stretching by sqrt(2):

        vol = 2^(m-1) * vol(S^(2m-1)) / q.

    Monte-Carlo integration of the embedding confirms the constant (tests).
    """
    if isinstance(c, FullFlowComponent):
        raise ValueError("use unit-bundle volume for whole-period components")
    m = c.m
    return 2 ** (m - 1) * sphere_volume(m) / c.lens.q


def component_volume_symbol(c: GeodesicComponent) -> str:
    return f"2^{c.m - 1} * {sphere_volume_symbol(c.m)} / {c.lens.q}"


def unit_bundle_volume(lens: LensSpace) -> float:
    """Liouville volume of the unit tangent bundle of the quotient."""
    n = lens.n
    return sphere_volume(n) / lens.q * sphere_volume_fiber(n)


def sphere_volume_fiber(n: int) -> float:
    """vol(S^(2n-2)), the fiber of the unit bundle over a (2n-1)-manifold."""
    k = 2 * n - 2
    # vol(S^k) = 2 pi^((k+1)/2) / Gamma((k+1)/2)
    return 2 * math.pi ** ((k + 1) / 2) / math.gamma((k + 1) / 2)


@dataclass(frozen=True)
class WaveTerm:
    component: object
    sign: int
    amplitude_float: float
    amplitude_symbolic: dict


@dataclass(frozen=True)
class WaveTermSum:
    """Signed amplitude list whose exact sum decides the leading singularity."""

    lens: LensSpace
    tau_units: int
    D: int  # maximal component dimension at this length
    terms: tuple[WaveTerm, ...]
    exact_sum_numerator: CycloNumber
    excluded: tuple = ()
    kind: str = "short"

    @property
    def tau(self) -> float:
        return 2 * math.pi * self.tau_units / self.lens.q

    @property
    def float_sum(self) -> float:
        return sum(t.sign * t.amplitude_float for t in self.terms)


def leading_sum(lens: LensSpace, entry: LengthSpectrumEntry) -> WaveTermSum:
    """Signed leading-density sum over the maximal-dimension components.

    Time-reversed partners carry identical sign and amplitude, so the exact
    numerator ranges over one orientation per class; the overall factor 2 is
    part of the stripped positive constant.  Winding shifts every Morse index
    by the same even amount, so the decision at (l, winding) matches winding 0.
    """
    if entry.kind == "full":
        comp = entry.components[0]
        sign = component_index(comp).sign
        amp = unit_bundle_volume(lens) / (2 * math.pi)
        term = WaveTerm(
            component=comp, sign=sign, amplitude_float=amp,
            amplitude_symbolic={"liouville_volume_over_2pi": True,
                                "note": "whole-bundle fixed set; single term"})
        numerator = CycloNumber.from_rational(lens.q, sign)
        return WaveTermSum(lens=lens, tau_units=entry.tau_units,
                           D=comp.dim, terms=(term,),
                           exact_sum_numerator=numerator, kind="full")

    comps = entry.components
    max_dim = max(c.dim for c in comps)
    leading = [c for c in comps if c.dim == max_dim]
    excluded = tuple(c for c in comps if c.dim < max_dim)

    terms = []
    scalars = {}
    for c in leading:
        scalar = dg_scalar(c)
        scalars[c] = scalar
        amp = scalar.float_value * component_volume(c) / (2 * math.pi)
        terms.append(WaveTerm(
            component=c,
            sign=component_index(c).sign,
            amplitude_float=amp,
            amplitude_symbolic={
                "density": scalar.symbolic(),
                "volume": component_volume_symbol(c),
                "prefactor": "1/(2*pi)",
            }))

    # exact numerator over one orientation per class, denominators cleared;
    # factors are 2|cos - cos| (integral coefficients), a common positive
    # scaling across terms since all leading classes share m
    plus = [t for t in terms if t.component.orientation == +1]
    q = lens.q
    tau_cos = CosSymbol(entry.components[0].l, q)
    denominators = []
    for t in plus:
        d = CycloNumber.one(q)
        for _, a in scalars[t.component].outside_factors:
            d = d * two_abs_cos_diff_exact(CosSymbol(a, q), tau_cos)
        denominators.append(d)
    numerator = CycloNumber.zero(q)
    for j, t in enumerate(plus):
        prod = CycloNumber.from_rational(q, t.sign)
        for jp, d in enumerate(denominators):
            if jp != j:
                prod = prod * d
        numerator = numerator + prod

    return WaveTermSum(lens=lens, tau_units=entry.tau_units, D=max_dim,
                       terms=tuple(terms), exact_sum_numerator=numerator,
                       excluded=excluded, kind="short")


NONZERO = "NONZERO"
ZERO = "ZERO"


def cancellation_decision(ws: WaveTermSum) -> str:
    """Exact decision whether the leading sum vanishes.

    ZERO means only that the top-order coefficient cancels; whether the length
    is a genuine singularity is then undetermined at this order.
    """
    return ZERO if ws.exact_sum_numerator.is_zero() else NONZERO


def lemma_check(q: int, p: int, l: int) -> bool:
    """Exact vanishing test of
    cos(2*pi*p*l/q) - cos(2*pi*p*k/q) - cos(2*pi*l/q) + cos(2*pi*k/q)
    in Q(zeta_q), with k the residue solving cos(2*pi*k*p/q) = cos(2*pi*l/q).

    For an odd prime q this vanishes exactly for p = +-1 (mod q).
    """
    if q < 3 or q % 2 == 0 or not _is_prime(q):
        raise ValueError("lemma scope: q must be an odd prime")
    if math.gcd(p, q) != 1:
        raise ValueError("p must be a unit mod q")
    if not 1 <= l <= q - 1:
        raise ValueError("l out of range")
    k = (pow(p, -1, q) * l) % q
    expr = (_cos(q, p * l) - _cos(q, p * k) - _cos(q, l) + _cos(q, k))
    return expr.is_zero()


def _cos(q: int, a: int) -> CycloNumber:
    from .exactnum import cos_as_cyclo
    return cos_as_cyclo(CosSymbol(a, q))


def _is_prime(q: int) -> bool:
    if q < 2:
        return False
    d = 2
    while d * d <= q:
        if q % d == 0:
            return False
        d += 1
    return True


# -- high-precision float cross-check -----------------------------------


def stripped_sum_highprec(lens: LensSpace, l: int, dps: int = 200):
    """(sum, max_term) of sum_j sign_j / prod |cos - cos| at dps digits.

    Independent cross-check of the exact decision: ZERO decisions must push
    the magnitude below 1e-50 at 200 digits; NONZERO ones stay above
    1e-12 * max_term.
    """
    import mpmath

    with mpmath.workdps(dps):
        two_pi = 2 * mpmath.pi
        cos_tau = mpmath.cos(two_pi * l / lens.q)
        total = mpmath.mpf(0)
        max_term = mpmath.mpf(0)
        comps = [c for c in components_at(lens, l) if c.orientation == +1]
        max_m = max(c.m for c in comps)
        for c in comps:
            if c.m != max_m:
                continue
            term = mpmath.mpf(1)
            k = c.realizer_canonical
            for i in range(lens.n):
                if i in c.members:
                    continue
                term /= abs(mpmath.cos(two_pi * lens.p[i] * k / lens.q) - cos_tau)
            sign = component_index(c).sign
            total += sign * term
            max_term = max(max_term, abs(term))
        return total, max_term


# -- family search -------------------------------------------------------


@dataclass(frozen=True)
class SearchFinding:
    q: int
    p: tuple[int, ...]
    l: int
    winding: int
    decision: str
    terms: tuple[dict, ...]
    note: str = ""


@dataclass
class SearchReport:
    n: int
    q_values: tuple[int, ...]
    prime_only: bool
    cells_examined: int
    lengths_examined: int
    findings: list[SearchFinding] = field(default_factory=list)

    def to_jsonable(self) -> list[dict]:
        return [
            {
                "q": f.q,
                "p": list(f.p),
                "l": f.l,
                "winding": f.winding,
                "decision": f.decision,
                "terms": list(f.terms),
                "note": f.note,
            }
            for f in self.findings
        ]


def _search_cell(args) -> tuple[int, tuple[int, ...], list[SearchFinding], int]:
    q, p = args
    lens = LensSpace(q, p)
    findings = []
    examined = 0
    for l in lens.valid_l():
        entry = LengthSpectrumEntry(
            tau_units=l, kind="short", components=components_at(lens, l))
        ws = leading_sum(lens, entry)
        examined += 1
        if cancellation_decision(ws) == ZERO:
            findings.append(SearchFinding(
                q=q, p=p, l=l, winding=0, decision=ZERO,
                terms=tuple(_term_jsonable(t) for t in ws.terms),
                note="leading-order cancellation -- singularity undetermined"))
    return q, p, findings, examined


def _term_jsonable(t: WaveTerm) -> dict:
    c = t.component
    return {
        "class": list(getattr(c, "members", ())),
        "orientation": getattr(c, "orientation", 0),
        "sign": t.sign,
        "amplitude_float": t.amplitude_float,
        "amplitude_symbolic": t.amplitude_symbolic,
    }


def cancellation_search(
    n: int,
    q_values: Sequence[int],
    prime_only: bool = False,
    threads: int = 1,
) -> SearchReport:
    """Scan L(q; 1, p_2..p_n) over all unit exponent tuples and all short
    lengths, reporting every exact leading-order cancellation.

    Exponent tuples are enumerated with p_1 = 1 (the normalization symmetry);
    windings add nothing since they shift all signs equally.  The report is
    sorted by (q, p, l) no matter how work is distributed.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    qs = tuple(q for q in q_values if q > 2 and (not prime_only or _is_prime(q)))
    cells = []
    for q in qs:
        units = [u for u in range(1, q) if math.gcd(u, q) == 1]
        def extend(prefix):
            if len(prefix) == n:
                cells.append((q, tuple(prefix)))
                return
            for u in units:
                extend(prefix + [u])
        extend([1])
    report = SearchReport(n=n, q_values=qs, prime_only=prime_only,
                          cells_examined=len(cells), lengths_examined=0)
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_search_cell, cells, chunksize=8))
    else:
        results = [_search_cell(cell) for cell in cells]
    results.sort(key=lambda r: (r[0], r[1]))
    for _, _, findings, examined in results:
        report.lengths_examined += examined
        report.findings.extend(findings)
    report.findings.sort(key=lambda f: (f.q, f.p, f.l))
    return report


def analyze(lens: LensSpace, max_winding: int = 0) -> list[dict]:
    """Full per-length table: components, indices, densities, decision."""
    from .morse import OMEGA_INDEX_CONVENTION

    max_length = (max_winding + 1) * lens.period_units * 2 * math.pi / lens.q
    rows = []
    for entry in length_spectrum(lens, max_length + 1e-9):
        ws = leading_sum(lens, entry)
        decision = cancellation_decision(ws)
        comps = []
        for c in entry.components:
            idx = component_index(c)
            row = {
                "dim": c.dim,
                "morse": {
                    "ind_omega": idx.ind_omega,
                    "mu_tau": idx.mu_tau,
                    "kernel_term": idx.kernel_term,
                    "concavity": idx.concavity,
                    "total": idx.total,
                },
            }
            if isinstance(c, GeodesicComponent):
                from .lens import is_primitive
                scalar = dg_scalar(c)
                row.update({
                    "kind": "short",
                    "class": list(c.members),
                    "orientation": c.orientation,
                    "realizer": c.realizer_k,
                    "winding": c.winding,
                    "density_float": scalar.float_value,
                    "density_symbolic": scalar.symbolic(),
                    "volume_float": component_volume(c),
                    "volume_symbolic": component_volume_symbol(c),
                    "primitive": is_primitive(c) if c.winding == 0 else False,
                })
            else:
                row.update({"kind": "full", "multiple": c.multiple})
            comps.append(row)
        rows.append({
            "tau_units": entry.tau_units,
            "tau": entry.tau,
            "kind": entry.kind,
            "max_dim": ws.D,
            "components": comps,
            "leading_terms": [_term_jsonable(t) for t in ws.terms],
            "decision": decision,
            "note": ("leading-order cancellation -- singularity undetermined"
                     if decision == ZERO else ""),
            "conventions": {
                "ind_omega": OMEGA_INDEX_CONVENTION,
                "even_q_iterate_deck": "realizer of the underlying class, shifted by q/2 per winding",
            },
        })
    return rows
