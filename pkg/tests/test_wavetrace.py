"""Leading densities, volumes, exact cancellation decisions, family search."""

import math
import random
from fractions import Fraction

import mpmath
import numpy as np
import pytest

from poisson_audit.exactnum import CycloNumber
from poisson_audit.lens import (
    LengthSpectrumEntry,
    LensSpace,
    components_at,
    length_spectrum,
)
from poisson_audit.wavetrace import (
    NONZERO,
    ZERO,
    WaveTermSum,
    analyze,
    cancellation_decision,
    cancellation_search,
    component_volume,
    dg_scalar,
    leading_sum,
    lemma_check,
    stripped_sum_highprec,
    unit_bundle_volume,
)


def entry_for(lens, l, winding=0):
    return LengthSpectrumEntry(
        tau_units=winding * lens.period_units + l, kind="short",
        components=components_at(lens, l, winding))


# -- density scalar ------------------------------------------------------


def test_dg_scalar_homogeneous_closed_form():
    for q, n in [(3, 2), (7, 3), (9, 2)]:
        lens = LensSpace(q, [1] * n)
        for l in lens.valid_l():
            c = components_at(lens, l)[0]
            tau = 2 * math.pi * l / q
            expected = tau ** -0.5 * (2 * abs(math.sin(tau))) ** (-(n - 1))
            assert abs(dg_scalar(c).float_value - expected) < 1e-12 * expected


def test_dg_scalar_example_L512():
    lens = LensSpace(5, [1, 2])
    tau = 4 * math.pi / 5
    vals = []
    for c in components_at(lens, 2):
        s = dg_scalar(c)
        assert len(s.outside_factors) == 1
        expected = tau ** -0.5 / (2 * abs(math.cos(2 * math.pi / 5) - math.cos(tau)))
        assert abs(s.float_value - expected) < 1e-12
        vals.append(s.float_value)
    assert max(vals) - min(vals) < 1e-15  # orientation and class symmetry


def test_dg_scalar_orientation_invariance():
    for q, p in [(5, (1, 2)), (8, (1, 3, 5)), (11, (1, 2, 6))]:
        lens = LensSpace(q, p)
        for l in lens.valid_l():
            comps = components_at(lens, l)
            for plus, minus in zip(comps[::2], comps[1::2]):
                assert dg_scalar(plus) == dg_scalar(minus)


# -- component volume (independent Monte-Carlo of the graph embedding) ---


def graph_volume_montecarlo(lens, comp, samples=3000, seed=4):
    rng = np.random.default_rng(seed)
    J = comp.j_matrix().astype(float)
    d = 2 * lens.n
    cls = list(comp.coordinate_indices)
    total = 0.0
    for _ in range(samples):
        x = comp.random_adapted_point(rng)
        B = np.zeros((d, len(cls)))
        for col, i in enumerate(cls):
            B[i, col] = 1.0
        Q = B - np.outer(x, x @ B)
        u, s, _ = np.linalg.svd(Q, full_matrices=False)
        tb = u[:, s > 1e-9]
        cols = []
        for j in range(tb.shape[1]):
            A = tb[:, j]
            vert = J @ A - ((J @ A) @ x) * x
            cols.append(np.concatenate([A, vert]))
        M = np.array(cols).T
        total += math.sqrt(np.linalg.det(M.T @ M))
    m = comp.m
    sphere = 2 * math.pi ** m / math.factorial(m - 1)
    return total / samples * sphere / lens.q


def test_component_volume_against_montecarlo():
    cases = [
        (LensSpace(5, [1, 2]), 1, 0),   # m = 1 circle class
        (LensSpace(3, [1, 1]), 1, 0),   # m = 2 homogeneous
        (LensSpace(8, [1, 3, 5]), 1, 1),  # m = 2 inside n = 3
    ]
    for lens, l, class_index in cases:
        comp = [c for c in components_at(lens, l)
                if c.class_index == class_index and c.orientation == 1][0]
        mc = graph_volume_montecarlo(lens, comp)
        closed = component_volume(comp)
        assert abs(mc - closed) / closed < 0.01


def test_component_volume_values_and_scaling():
    c5 = components_at(LensSpace(5, [1, 2]), 1)[0]
    assert abs(component_volume(c5) - 2 * math.pi / 5) < 1e-14
    ch = components_at(LensSpace(3, [1, 1]), 1)[0]
    assert abs(component_volume(ch) - 2 * (2 * math.pi ** 2) / 3) < 1e-12
    # doubling the deck order halves the volume at fixed class size
    c10 = components_at(LensSpace(10, [1, 3]), 1)[0]
    assert c10.m == c5.m
    assert abs(component_volume(c10) * 2 - component_volume(c5) * 1) < 1e-14


# -- leading sums ---------------------------------------------------------


def test_leading_sum_homogeneous():
    for q in (3, 9, 17):
        lens = LensSpace(q, [1, 1])
        for e in length_spectrum(lens, 2 * math.pi):
            ws = leading_sum(lens, e)
            if e.kind == "short":
                assert len(ws.terms) == 2
                signs = {t.sign for t in ws.terms}
                amps = [t.amplitude_float for t in ws.terms]
                assert len(signs) == 1
                assert abs(amps[0] - amps[1]) < 1e-15
            assert cancellation_decision(ws) == NONZERO


def test_leading_sum_systole_positive():
    rng = random.Random(1)
    for _ in range(30):
        q = rng.randrange(3, 40)
        units = [u for u in range(1, q) if math.gcd(u, q) == 1]
        lens = LensSpace(q, (1, rng.choice(units), rng.choice(units)))
        ws = leading_sum(lens, entry_for(lens, 1))
        assert all(t.sign == 1 for t in ws.terms)
        assert cancellation_decision(ws) == NONZERO


def test_leading_sum_L512_tau_4pi5():
    lens = LensSpace(5, [1, 2])
    ws = leading_sum(lens, entry_for(lens, 2))
    assert [t.sign for t in ws.terms] == [-1, -1, -1, -1]
    amps = [t.amplitude_float for t in ws.terms]
    assert max(amps) - min(amps) < 1e-15
    assert cancellation_decision(ws) == NONZERO


def test_leading_sum_restricts_to_max_dimension():
    lens = LensSpace(8, [1, 3, 5])
    # l = 1: one class of size 2 (planes 2, 3) and one singleton
    ws = leading_sum(lens, entry_for(lens, 1))
    assert ws.D == 3
    assert all(t.component.dim == 3 for t in ws.terms)
    assert len(ws.excluded) == 2
    assert cancellation_decision(ws) == NONZERO


def test_time_reversal_pairing():
    for q, p in [(5, (1, 3)), (7, (1, 2, 3)), (12, (1, 5, 7))]:
        lens = LensSpace(q, p)
        for e in length_spectrum(lens, 2 * math.pi):
            if e.kind != "short":
                continue
            ws = leading_sum(lens, e)
            by_class = {}
            for t in ws.terms:
                by_class.setdefault(t.component.class_index, []).append(t)
            for pair in by_class.values():
                assert len(pair) == 2
                assert pair[0].sign == pair[1].sign
                assert abs(pair[0].amplitude_float - pair[1].amplitude_float) < 1e-15


def test_full_entry_single_term():
    lens = LensSpace(5, [1, 2])
    e = [e for e in length_spectrum(lens, 2 * math.pi) if e.kind == "full"][0]
    ws = leading_sum(lens, e)
    assert len(ws.terms) == 1
    assert ws.D == 4 * lens.n - 3
    assert cancellation_decision(ws) == NONZERO
    assert ws.terms[0].amplitude_float == pytest.approx(unit_bundle_volume(lens) / (2 * math.pi))


# -- the decision procedure ----------------------------------------------


def test_cancellation_decision_synthetic_zero():
    # equal amplitudes with opposite signs must cancel exactly
    lens = LensSpace(5, [1, 2])
    d = CycloNumber.from_rational(5, Fraction(7, 3))
    numerator = d * CycloNumber.from_rational(5, 1) + d * CycloNumber.from_rational(5, -1)
    ws = WaveTermSum(lens=lens, tau_units=2, D=1, terms=(),
                     exact_sum_numerator=numerator)
    assert cancellation_decision(ws) == ZERO


def test_decision_invariant_under_positive_scaling():
    lens = LensSpace(7, [1, 3])
    ws = leading_sum(lens, entry_for(lens, 2))
    n0 = ws.exact_sum_numerator
    for c in (Fraction(2), Fraction(3, 5), Fraction(1, 7)):
        scaled = n0 * c
        assert scaled.is_zero() == n0.is_zero()


def test_exact_float_agreement():
    rng = random.Random(9)
    for _ in range(25):
        q = rng.randrange(3, 30)
        units = [u for u in range(1, q) if math.gcd(u, q) == 1]
        lens = LensSpace(q, (1, rng.choice(units)))
        ls = list(lens.valid_l())
        for l in rng.sample(ls, min(3, len(ls))):
            ws = leading_sum(lens, entry_for(lens, l))
            decision = cancellation_decision(ws)
            total, max_term = stripped_sum_highprec(lens, l)
            if decision == NONZERO:
                assert abs(total) > 1e-12 * max_term
            else:
                assert abs(total) < mpmath.mpf("1e-50")


# -- the four-cosine vanishing test ---------------------------------------


def test_lemma_check_examples():
    for l in range(1, 7):
        assert lemma_check(7, 1, l)
        assert lemma_check(7, 6, l)
    assert not lemma_check(7, 3, 1)
    with pytest.raises(ValueError):
        lemma_check(9, 2, 1)  # composite
    with pytest.raises(ValueError):
        lemma_check(2, 1, 1)
    with pytest.raises(ValueError):
        lemma_check(7, 14, 1)  # not a unit


def test_lemma_check_exhaustive_small():
    for q in (3, 5, 7, 11, 13):
        for p in range(1, q):
            expected = p in (1, q - 1)
            for l in range(1, q):
                assert lemma_check(q, p, l) == expected


# -- family search ---------------------------------------------------------


def test_search_prime_three_dim_empty():
    rep = cancellation_search(2, range(3, 24), prime_only=True)
    assert rep.findings == []
    assert rep.cells_examined == sum(q - 1 for q in (3, 5, 7, 11, 13, 17, 19, 23))


def test_search_decisions_match_highprec_oracle():
    # small composite family, n = 2: verify every decision at 200 digits
    for q in (4, 6, 8, 9, 10, 12):
        units = [u for u in range(1, q) if math.gcd(u, q) == 1]
        for p2 in units:
            lens = LensSpace(q, (1, p2))
            for l in lens.valid_l():
                ws = leading_sum(lens, entry_for(lens, l))
                total, max_term = stripped_sum_highprec(lens, l)
                if cancellation_decision(ws) == ZERO:
                    assert abs(total) < mpmath.mpf("1e-50")
                else:
                    assert abs(total) > 1e-12 * max_term


def test_search_n3_sample_against_oracle():
    rng = random.Random(23)
    for q in (5, 7, 9, 11, 13):
        units = [u for u in range(1, q) if math.gcd(u, q) == 1]
        for _ in range(4):
            lens = LensSpace(q, (1, rng.choice(units), rng.choice(units)))
            for l in lens.valid_l():
                ws = leading_sum(lens, entry_for(lens, l))
                total, max_term = stripped_sum_highprec(lens, l)
                if cancellation_decision(ws) == ZERO:
                    assert abs(total) < mpmath.mpf("1e-50")
                else:
                    assert abs(total) > 1e-12 * max_term


def test_search_deterministic_and_thread_independent():
    r1 = cancellation_search(2, range(3, 14), threads=1)
    r2 = cancellation_search(2, range(3, 14), threads=2)
    assert r1.to_jsonable() == r2.to_jsonable()
    assert r1.cells_examined == r2.cells_examined


def test_winding_does_not_change_decision():
    lens = LensSpace(5, [1, 2])
    for l in lens.valid_l():
        d0 = cancellation_decision(leading_sum(lens, entry_for(lens, l)))
        d1 = cancellation_decision(leading_sum(lens, entry_for(lens, l, winding=1)))
        assert d0 == d1


def test_analyze_rows():
    lens = LensSpace(5, [1, 2])
    rows = analyze(lens)
    assert len(rows) == 5
    assert all(r["decision"] == NONZERO for r in rows)
    short = rows[0]
    assert short["kind"] == "short"
    assert short["components"][0]["primitive"] is True
    assert rows[1]["components"][0]["morse"]["total"] == 2
