"""Independent numeric verification layer.

Nothing here consults the exact decision paths: flow differentials are
assembled from the explicit sphere geodesic flow, eigenvalue multiplicities
are counted by exact invariant-monomial enumeration, and the smoothed wave
trace is summed directly from the spectrum.  Agreement between these numbers
and the closed-form modules is the evidence the toolkit reports.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .flat import BieberbachGroup, _b_minus_id, _integer_kernel
from .lens import FullFlowComponent, GeodesicComponent, LensSpace, length_spectrum


# ----------------------------------------------------------------------
# geodesic flow differential on the sphere's tangent bundle
# ----------------------------------------------------------------------


@dataclass
class FlowDifferential:
    """Ambient linearization of deck^(-k) o (time-tau flow) at a fixed point
    theta = (x, v) of the unit tangent bundle, on horizontal + vertical
    coordinates of R^{2n} + R^{2n}."""

    x: np.ndarray
    v: np.ndarray
    tau: float
    deck_exponent: int
    matrix: np.ndarray  # 4n x 4n

    def symplectic_defect(self) -> float:
        """Max violation of M^T Omega M = Omega for the canonical pairing."""
        d = self.matrix.shape[0] // 2
        omega = np.block([[np.zeros((d, d)), np.eye(d)], [-np.eye(d), np.zeros((d, d))]])
        return float(np.abs(self.matrix.T @ omega @ self.matrix - omega).max())


def jacobi_propagator(lens: LensSpace, component, sample_point: np.ndarray) -> FlowDifferential:
    """Linearized return map at a sample point of the component.

    Jacobi fields along a sphere geodesic are rotations of their initial data,
    so the unit-bundle differential extends to the linear map
    [[cos*T^-k, sin*T^-k], [-sin*T^-k, cos*T^-k]].
    """
    x = np.asarray(sample_point, dtype=float)
    if abs(np.linalg.norm(x) - 1) > 1e-8:
        raise ValueError("sample point is not on the unit sphere")
    if isinstance(component, FullFlowComponent):
        k = 0
        tau = component.tau
    else:
        allowed = set(component.coordinate_indices)
        off = [abs(x[i]) for i in range(2 * lens.n) if i not in allowed]
        if off and max(off) > 1e-8:
            raise ValueError("sample point leaves the adapted subsphere")
        k = component.deck_exponent
        tau = component.tau
    c, s = math.cos(tau), math.sin(tau)
    tmk = lens.rotation_matrix(-k)
    v = None
    if isinstance(component, GeodesicComponent):
        v = component.j_matrix().astype(float) @ x
    matrix = np.block([[c * tmk, s * tmk], [-s * tmk, c * tmk]])
    return FlowDifferential(x=x, v=v, tau=tau, deck_exponent=k, matrix=matrix)


def block_determinants(lens: LensSpace, component: GeodesicComponent):
    """Determinant of deck^k - flow on each invariant 4-plane outside the
    class, paired with the predicted value 4*(cos(2*pi*k*p_i/q) - cos tau)^2."""
    q = lens.q
    k = component.deck_exponent
    tau = component.tau
    c, s = math.cos(tau), math.sin(tau)
    out = []
    for i in range(lens.n):
        if i in component.members:
            continue
        a = 2 * math.pi * lens.p[i] * k / q
        rk = np.array([[math.cos(a), -math.sin(a)], [math.sin(a), math.cos(a)]])
        block = np.block([[rk - c * np.eye(2), -s * np.eye(2)],
                          [s * np.eye(2), rk - c * np.eye(2)]])
        predicted = 4 * (math.cos(a) - math.cos(tau)) ** 2
        out.append((i, float(np.linalg.det(block)), predicted))
    return out


# ----------------------------------------------------------------------
# cleanliness: numeric nullity of the restricted return map
# ----------------------------------------------------------------------


def _perp_basis(vectors: Sequence[np.ndarray], dim: int) -> np.ndarray:
    """Orthonormal basis (columns) of the orthogonal complement."""
    if vectors:
        A = np.array(vectors)
        u, s, vt = np.linalg.svd(A, full_matrices=True)
        rank = int((s > 1e-12).sum())
        return vt[rank:].T
    return np.eye(dim)


@dataclass
class CleanlinessSample:
    nullity: int
    singular_values: np.ndarray
    graph_residual: float
    inconclusive: bool


def cleanliness_check(lens: LensSpace, component: GeodesicComponent,
                      samples: int = 10, seed: int = 0) -> dict:
    """At random component points, the nullity of (Id - return map) restricted
    to the transverse slot E + E must be 2m - 2, with kernel equal to the
    graph of the tangential J over the adapted subsphere."""
    if samples < 1:
        raise ValueError("need at least one sample")
    rng = np.random.default_rng(seed)
    n = lens.n
    expected = 2 * component.m - 2
    J = component.j_matrix().astype(float)
    results = []
    for _ in range(samples):
        x = component.random_adapted_point(rng)
        v = J @ x
        flow = jacobi_propagator(lens, component, x)
        E = _perp_basis([x, v], 2 * n)  # 2n x (2n-2)
        dimE = E.shape[1]
        # basis of E + E inside R^{4n}
        basis = np.zeros((4 * n, 2 * dimE))
        basis[:2 * n, :dimE] = E
        basis[2 * n:, dimE:] = E
        P = np.eye(4 * n) - flow.matrix
        R = basis.T @ P @ basis  # restriction (E+E invariant under the flow map)
        closure_defect = np.abs(P @ basis - basis @ R).max()
        sv = np.linalg.svd(R, compute_uv=False)
        nullity = int((sv < 1e-8).sum())
        inconclusive = bool(((sv > 1e-10) & (sv < 1e-6)).any()) or closure_defect > 1e-8
        # kernel basis vs graph of J^T restricted to the subsphere tangent
        _, s_full, vt = np.linalg.svd(R)
        kernel = vt[len(sv) - nullity:].T if nullity else np.zeros((2 * dimE, 0))
        graph_residual = 0.0
        if nullity:
            amb = basis @ kernel  # columns (A, B) in R^{4n}
            A, B = amb[:2 * n], amb[2 * n:]
            JA = J @ A
            JA -= x[:, None] * (x @ JA)  # tangential part
            graph_residual = float(np.abs(B - JA).max())
            # A must be tangent to the adapted subsphere
            outside = [i for i in range(2 * n) if i not in component.coordinate_indices]
            if outside:
                graph_residual = max(graph_residual, float(np.abs(A[outside]).max()))
        results.append(CleanlinessSample(
            nullity=nullity, singular_values=sv,
            graph_residual=graph_residual, inconclusive=inconclusive))
    return {
        "expected_nullity": expected,
        "samples": results,
        "pass": all((r.nullity == expected and not r.inconclusive
                     and r.graph_residual < 1e-8) for r in results),
    }


# ----------------------------------------------------------------------
# numeric density via symplectic frames
# ----------------------------------------------------------------------


def _tangent_flow_differential(x, v, tau, tmk):
    """Differential of deck^(-k) o (time-tau flow) on the full tangent bundle
    at theta=(x,v), including the fiber-scaling direction, ambient coords."""
    G = -math.sin(tau) * x + math.cos(tau) * v
    H = math.cos(tau) * x + math.sin(tau) * v

    def apply(dx, dv):
        s = v @ dv
        dvp = dv - s * v
        dpos = math.cos(tau) * dx + math.sin(tau) * dvp + s * tau * G
        dvel = -math.sin(tau) * dx + math.cos(tau) * dvp + s * (G - tau * H)
        return tmk @ dpos, tmk @ dvel

    return apply


def numeric_dg(lens: LensSpace, component: GeodesicComponent,
               sample_point: Optional[np.ndarray] = None) -> float:
    """Density scalar from the half-density quotient of symplectic frames.

    Builds the orthonormal frame of the component tangent (flow direction plus
    sqrt(2)-normalized graph pairs), a dual frame under the canonical pairing,
    and a complement; the scalar is |det[V E]|^(1/2) / |det[(Id-D)V F]|^(1/2)
    in horizontal/vertical coordinates.  Must match the closed form to 1e-9
    relative.
    """
    n = lens.n
    d = 2 * n
    if sample_point is None:
        x = np.zeros(d)
        x[2 * component.members[0]] = 1.0
    else:
        x = np.asarray(sample_point, dtype=float)
    J = component.j_matrix().astype(float)
    v = J @ x
    tau = component.tau
    tmk = lens.rotation_matrix(-component.deck_exponent)
    apply_D = _tangent_flow_differential(x, v, tau, tmk)

    # orthonormal basis of the subsphere tangent orthogonal to the flow direction
    cls = list(component.coordinate_indices)
    basis = []
    for i in cls:
        e = np.zeros(d)
        e[i] = 1.0
        basis.append(e)
    B = np.array(basis).T
    Q = B - np.outer(x, x @ B) - np.outer(v, v @ B)
    u, s, _ = np.linalg.svd(Q, full_matrices=False)
    bs = [u[:, i] for i in range(len(s)) if s[i] > 1e-9]
    if len(bs) != 2 * component.m - 2:
        raise ArithmeticError("frame construction degenerated")

    out_idx = [i for i in range(d) if i not in cls]
    zero = np.zeros(d)
    sqrt2 = math.sqrt(2)
    E = [(v, zero)] + [(b / sqrt2, (J @ b) / sqrt2) for b in bs]
    B1 = [(_unit(d, i), zero) for i in out_idx] + [(zero, _unit(d, i)) for i in out_idx]
    B2 = [(zero, v)] + [((J @ b) / sqrt2, b / sqrt2) for b in bs]
    F = [(zero, v)] + [((-(J @ b)) / sqrt2, b / sqrt2) for b in bs]
    V = B1 + B2

    # horizontal/vertical chart: onb of the hyperplane perpendicular to x
    C = _perp_basis([x], d)

    def coords(pair):
        A, Bv = pair
        return np.concatenate([C.T @ A, C.T @ Bv])

    def p_hat(pair):
        A, Bv = pair
        dx, dv = A, Bv - (v @ A) * x
        dp, dvl = apply_D(dx, dv)
        A2, B2v = dp, dvl + (v @ dp) * x
        return (A - A2, Bv - B2v)

    num = abs(np.linalg.det(np.array([coords(w) for w in V + E]).T)) ** 0.5
    den = abs(np.linalg.det(np.array([coords(p_hat(w)) for w in V]
                                     + [coords(w) for w in F]).T)) ** 0.5
    if den == 0:
        raise ArithmeticError("degenerate frame: zero denominator")
    return num / den


def _unit(d, i):
    e = np.zeros(d)
    e[i] = 1.0
    return e


# ----------------------------------------------------------------------
# Laplace multiplicities by exact invariant counting
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class SpectrumTable:
    q: int
    p: tuple[int, ...]
    cutoff: int
    multiplicities: tuple[int, ...]

    @property
    def n(self) -> int:
        return len(self.p)

    def eigenvalue(self, k: int) -> int:
        return k * (k + 2 * self.n - 2)


def laplace_multiplicities(lens, cutoff: int) -> SpectrumTable:
    """Multiplicity of the k-th sphere eigenvalue k(k+2n-2) on the quotient,
    for k = 0..cutoff, as exact integers.

    Counts monomials z^a zbar^b of each degree whose rotation weight
    sum (a_i - b_i) p_i vanishes mod q, then removes the trace part; this is
    the character average over the deck group evaluated without rounding.
    Degenerate inputs q = 1 (sphere) and q = 2 (projective space) are allowed
    here for cross-checks.
    """
    if isinstance(lens, LensSpace):
        q, p = lens.q, lens.p
    else:
        q, p = int(lens[0]), tuple(int(x) for x in lens[1])
        if q < 1 or any(math.gcd(x, q) != 1 for x in p):
            raise ValueError("rotation exponents must be units mod q")
    if cutoff < 0:
        raise ValueError("cutoff must be nonnegative")
    weights = [pi % q for pi in p] + [(-pi) % q for pi in p]
    counts = [[0] * q for _ in range(cutoff + 1)]
    counts[0][0] = 1
    for w in weights:
        new = [[0] * q for _ in range(cutoff + 1)]
        new[0] = counts[0][:]
        for dd in range(1, cutoff + 1):
            prev = new[dd - 1]
            old = counts[dd]
            new[dd] = [old[r] + prev[(r - w) % q] for r in range(q)]
        counts = new
    mult = []
    for k in range(cutoff + 1):
        mk = counts[k][0] - (counts[k - 2][0] if k >= 2 else 0)
        if mk < 0:
            raise ArithmeticError(f"negative multiplicity at k={k}")
        mult.append(mk)
    if mult[0] != 1:
        raise ArithmeticError("constant eigenfunction miscounted")
    return SpectrumTable(q=q, p=tuple(p), cutoff=cutoff, multiplicities=tuple(mult))


def sphere_harmonic_dim(k: int, n: int) -> int:
    """dim of degree-k harmonics on S^{2n-1}."""
    lower = math.comb(k + 2 * n - 3, 2 * n - 1) if k >= 2 else 0
    return math.comb(k + 2 * n - 1, 2 * n - 1) - lower


# ----------------------------------------------------------------------
# smoothed wave trace and peak detection
# ----------------------------------------------------------------------


def required_cutoff(epsilon: float, n: int, tail: float = 1e-16) -> int:
    """Smallest K with exp(-eps^2 * lambda_K / 2) < tail."""
    target = 2 * (-math.log(tail)) / epsilon ** 2
    a = n - 1
    return math.ceil(-a + math.sqrt(a * a + target)) + 1


def smoothed_trace(table: SpectrumTable, epsilon: float, t_grid: np.ndarray) -> np.ndarray:
    """S(t) = sum_k m_k exp(-eps^2 lambda_k / 2) exp(-i t sqrt(lambda_k))."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    need = required_cutoff(epsilon, table.n)
    if table.cutoff < need:
        raise ValueError(
            f"cutoff {table.cutoff} insufficient for epsilon={epsilon}; need K >= {need}")
    k = np.arange(table.cutoff + 1)
    lam = k * (k + 2 * table.n - 2)
    weights = np.array(table.multiplicities, dtype=float) * np.exp(-epsilon ** 2 * lam / 2)
    freqs = np.sqrt(lam.astype(float))
    t = np.asarray(t_grid, dtype=float)
    return (weights[None, :] * np.exp(-1j * np.outer(t, freqs))).sum(axis=1)


def default_grid(points: int = 2000) -> np.ndarray:
    """Uniform grid on (0, 2*pi]."""
    return 2 * math.pi * np.arange(1, points + 1) / points


def peak_report(table: SpectrumTable, epsilons: Sequence[float],
                t_grid: Optional[np.ndarray] = None,
                predicted: Optional[Iterable[float]] = None,
                controls: Optional[Iterable[float]] = None,
                growth_factor: float = 1.5) -> list[dict]:
    """Peak presence/growth at predicted lengths, boundedness at controls.

    A predicted length passes when every smoothing width shows a local max of
    |S| within one grid step of it and the peak values grow as the width
    shrinks; a control passes when its values stay within `growth_factor` of
    each other across successive widths.
    """
    if len(list(epsilons)) < 2:
        raise ValueError("need at least two smoothing widths")
    eps = sorted(epsilons, reverse=True)
    grid = default_grid() if t_grid is None else np.asarray(t_grid)
    if predicted is None:
        lens = LensSpace(table.q, table.p)
        predicted = [e.tau for e in length_spectrum(lens, float(grid[-1]) + 1e-9)]
    predicted = sorted(predicted)
    if controls is None:
        pts = [0.0] + list(predicted)
        controls = [(a + b) / 2 for a, b in zip(pts, pts[1:]) if b - a > 4 * (grid[1] - grid[0])]
    traces = {e: np.abs(smoothed_trace(table, e, grid)) for e in eps}

    def window_max(absS, tau):
        idx = int(np.argmin(np.abs(grid - tau)))
        lo, hi = max(idx - 1, 0), min(idx + 1, len(grid) - 1)
        has_peak = False
        for j in range(lo, hi + 1):
            left = absS[j - 1] if j > 0 else -np.inf
            right = absS[j + 1] if j < len(grid) - 1 else -np.inf
            if absS[j] >= left and absS[j] >= right:
                has_peak = True
        return has_peak, float(absS[lo:hi + 1].max())

    report = []
    for tau in predicted:
        values = []
        present = True
        for e in eps:
            ok, val = window_max(traces[e], tau)
            present = present and ok
            values.append(val)
        growing = all(b > a for a, b in zip(values, values[1:]))
        report.append({"tau": float(tau), "predicted": True,
                       "pass": bool(present and growing),
                       "peak_values": values})
    for tau in controls:
        values = [float(traces[e][int(np.argmin(np.abs(grid - tau)))]) for e in eps]
        bounded = all(
            (max(a, b) / max(min(a, b), 1e-300)) < growth_factor
            for a, b in zip(values, values[1:]))
        report.append({"tau": float(tau), "predicted": False,
                       "pass": bool(bounded), "peak_values": values})
    return report


def peak_amplitude_scaling(table: SpectrumTable, epsilons: Sequence[float],
                           t_grid: Optional[np.ndarray] = None) -> list[dict]:
    """Optional stretch check: fitted growth exponent of each peak.

    A singularity carried by a component family of dimension d makes the
    smoothed peak grow like eps^-(d+1)/2, so the log-log slope against 1/eps
    estimates d.  Reported for inspection only; peak_report remains the gate.
    """
    eps = sorted(epsilons, reverse=True)
    if len(eps) < 2:
        raise ValueError("need at least two smoothing widths")
    grid = default_grid() if t_grid is None else np.asarray(t_grid)
    lens = LensSpace(table.q, table.p)
    entries = length_spectrum(lens, float(grid[-1]) + 1e-9)
    traces = {e_: np.abs(smoothed_trace(table, e_, grid)) for e_ in eps}
    out = []
    for entry in entries:
        tau = entry.tau
        idx = int(np.argmin(np.abs(grid - tau)))
        lo, hi = max(idx - 2, 0), min(idx + 2, len(grid) - 1)
        values = [float(traces[e_][lo:hi + 1].max()) for e_ in eps]
        logs_eps = np.log([1 / e_ for e_ in eps])
        logs_val = np.log(values)
        slope = float(np.polyfit(logs_eps, logs_val, 1)[0])
        d = max(c.dim for c in entry.components)
        out.append({
            "tau": float(tau),
            "component_dim": d,
            "predicted_exponent": (d + 1) / 2,
            "fitted_exponent": slope,
            "peak_values": values,
        })
    return out


# ----------------------------------------------------------------------
# numeric density for flat components (reporting aid)
# ----------------------------------------------------------------------


def flat_component_density(group: BieberbachGroup, coset_index: int, tau: float) -> dict:
    """Frame/determinant density scalar and fixed-torus volume for one flat
    component; the closed-form side has no published analogue, so these
    numbers are reported rather than gated."""
    reps, _ = group.point_group()
    B, _b = reps[coset_index]
    n = group.dim
    G = np.array([[float(x) for x in row] for row in group.gram])
    L = np.linalg.cholesky(G)
    Bo = L.T @ np.array(B, dtype=float) @ np.linalg.inv(L.T)
    Binv = np.linalg.inv(Bo)
    P = np.eye(2 * n) - np.block([[Binv, tau * Binv], [np.zeros((n, n)), Binv]])
    # orthonormal kernel / image bases in orthonormal coordinates
    u, s, vt = np.linalg.svd(Bo - np.eye(n))
    rank = int((s > 1e-10).sum())
    ker = vt[rank:].T
    img = u[:, :rank]
    k = ker.shape[1]
    E = [np.concatenate([ker[:, i], np.zeros(n)]) for i in range(k)]
    F = [np.concatenate([np.zeros(n), ker[:, i]]) for i in range(k)]
    V = ([np.concatenate([img[:, j], np.zeros(n)]) for j in range(rank)]
         + [np.concatenate([np.zeros(n), img[:, j]]) for j in range(rank)]
         + [np.concatenate([np.zeros(n), ker[:, i]]) for i in range(k)])
    num = abs(np.linalg.det(np.array(V + E).T)) ** 0.5
    den = abs(np.linalg.det(np.array([P @ w for w in V] + F).T)) ** 0.5
    scalar = num / den
    # covolume of the fixed-space lattice
    K = _integer_kernel(_b_minus_id(B))
    if K:
        Km = np.array(K, dtype=float).T
        vol = math.sqrt(abs(np.linalg.det(Km.T @ G @ Km)))
    else:
        vol = 0.0
    return {
        "coset_index": coset_index,
        "density_scalar": float(scalar),
        "fixed_torus_volume": vol,
        "wave_term": float(scalar) * vol / (2 * math.pi),
    }
