"""Flat manifolds from Bieberbach data, in exact lattice coordinates.

A compact flat manifold is presented by a lattice Gram matrix G (so the
translation lattice is Z^n and all holonomy matrices are integral) together
with generators (B, b): B an integer G-isometry, b a rational translation
part.  Closed geodesics correspond to group elements: the element (B, b + lam)
moves a line parallel to the fixed space of B by the G-orthogonal projection
of b + lam onto ker(B - Id), so squared lengths are exact rationals and the
whole spectrum enumeration is rational linear algebra plus a lattice walk
bounded by a positive-definite form.

Everything here is Fraction/int arithmetic; floats appear only in enumeration
interval guesses (always followed by exact filtering) and display values.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

Matrix = list[list[Fraction]]


# ----------------------------------------------------------------------
# exact linear algebra helpers
# ----------------------------------------------------------------------


def _mat(rows) -> Matrix:
    return [[Fraction(x) for x in row] for row in rows]


def _identity(n: int) -> Matrix:
    return [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]


def _matmul(a: Matrix, b: Matrix) -> Matrix:
    return [[sum(a[i][k] * b[k][j] for k in range(len(b))) for j in range(len(b[0]))]
            for i in range(len(a))]


def _matvec(a: Matrix, v: Sequence[Fraction]) -> list[Fraction]:
    return [sum(row[k] * v[k] for k in range(len(v))) for row in a]


def _transpose(a: Matrix) -> Matrix:
    return [list(col) for col in zip(*a)]


def _rref(a: Matrix) -> tuple[Matrix, list[int]]:
    a = [row[:] for row in a]
    rows, cols = len(a), len(a[0]) if a else 0
    pivots = []
    r = 0
    for c in range(cols):
        pivot = next((i for i in range(r, rows) if a[i][c] != 0), None)
        if pivot is None:
            continue
        a[r], a[pivot] = a[pivot], a[r]
        inv = 1 / a[r][c]
        a[r] = [x * inv for x in a[r]]
        for i in range(rows):
            if i != r and a[i][c] != 0:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    return a, pivots


def _nullspace(a: Matrix) -> list[list[Fraction]]:
    """Basis of the rational kernel (as column vectors)."""
    if not a:
        return []
    rref, pivots = _rref(a)
    cols = len(a[0])
    free = [c for c in range(cols) if c not in pivots]
    basis = []
    for fc in free:
        v = [Fraction(0)] * cols
        v[fc] = Fraction(1)
        for r, pc in enumerate(pivots):
            v[pc] = -rref[r][fc]
        basis.append(v)
    return basis


def _column_space_basis(a: Matrix) -> list[list[Fraction]]:
    rref, pivots = _rref(_transpose(a))
    return [rref[i] for i in range(len(pivots))]


def _rank(a: Matrix) -> int:
    return len(_rref(a)[1])


def _solve(a: Matrix, b: Sequence[Fraction]) -> Optional[list[Fraction]]:
    """One exact solution of a x = b, or None."""
    rows, cols = len(a), len(a[0])
    aug = [a[i][:] + [Fraction(b[i])] for i in range(rows)]
    rref, pivots = _rref(aug)
    for row in rref:
        if all(x == 0 for x in row[:cols]) and row[cols] != 0:
            return None
    x = [Fraction(0)] * cols
    for r, pc in enumerate(pivots):
        if pc == cols:
            return None
        x[pc] = rref[r][cols]
    return x


def _inverse(a: Matrix) -> Matrix:
    n = len(a)
    aug = [a[i][:] + _identity(n)[i] for i in range(n)]
    rref, pivots = _rref(aug)
    if pivots != list(range(n)):
        raise ArithmeticError("matrix not invertible")
    return [row[n:] for row in rref]


def _smith_normal_form(a: list[list[int]]):
    """U A V = S with U, V unimodular and S diagonal (integers).

    Returns (U, S, V).  Small dense matrices only.
    """
    a = [[int(x) for x in row] for row in a]
    m, n = len(a), len(a[0]) if a else 0
    U = [[int(i == j) for j in range(m)] for i in range(m)]
    V = [[int(i == j) for j in range(n)] for i in range(n)]

    def row_add(i1, i2, c):
        for j in range(n):
            a[i1][j] += c * a[i2][j]
        for j in range(m):
            U[i1][j] += c * U[i2][j]

    def col_add(j1, j2, c):
        for i in range(m):
            a[i][j1] += c * a[i][j2]
        for i in range(n):
            V[i][j1] += c * V[i][j2]

    def row_swap(i1, i2):
        a[i1], a[i2] = a[i2], a[i1]
        U[i1], U[i2] = U[i2], U[i1]

    def col_swap(j1, j2):
        for i in range(m):
            a[i][j1], a[i][j2] = a[i][j2], a[i][j1]
        for i in range(n):
            V[i][j1], V[i][j2] = V[i][j2], V[i][j1]

    t = 0
    while t < min(m, n):
        # locate smallest nonzero entry in the trailing block
        best = None
        for i in range(t, m):
            for j in range(t, n):
                if a[i][j] and (best is None or abs(a[i][j]) < abs(a[best[0]][best[1]])):
                    best = (i, j)
        if best is None:
            break
        row_swap(t, best[0])
        col_swap(t, best[1])
        dirty = True
        while dirty:
            dirty = False
            for i in range(t + 1, m):
                if a[i][t]:
                    row_add(i, t, -(a[i][t] // a[t][t]))
                    if a[i][t]:
                        row_swap(t, i)
                        dirty = True
            for j in range(t + 1, n):
                if a[t][j]:
                    col_add(j, t, -(a[t][j] // a[t][t]))
                    if a[t][j]:
                        col_swap(t, j)
                        dirty = True
        t += 1
    return U, a, V


def _integer_kernel(a: list[list[int]]) -> list[list[int]]:
    """Basis (columns) of {x in Z^n : a x = 0}; primitive by unimodularity."""
    if not a:
        return []
    U, S, V = _smith_normal_form(a)
    m, n = len(a), len(a[0])
    basis = []
    for j in range(n):
        diag = S[j][j] if j < min(m, n) else 0
        if j >= m or diag == 0:
            basis.append([V[i][j] for i in range(n)])
    return basis


def _solvable_over_Z(a: list[list[int]], t: Sequence[int]) -> bool:
    """Whether a x = t has an integer solution."""
    U, S, V = _smith_normal_form(a)
    m, n = len(a), len(a[0])
    ut = [sum(U[i][j] * t[j] for j in range(m)) for i in range(m)]
    for i in range(m):
        diag = S[i][i] if i < min(m, n) else 0
        if diag == 0:
            if ut[i] != 0:
                return False
        elif ut[i] % diag != 0:
            return False
    return True


def _clear_denominators(rows: Matrix) -> list[list[int]]:
    out = []
    for row in rows:
        lcm = 1
        for x in row:
            lcm = lcm * x.denominator // math.gcd(lcm, x.denominator)
        out.append([int(x * lcm) for x in row])
    return out


# ----------------------------------------------------------------------
# groups
# ----------------------------------------------------------------------


def _b_minus_id(B: tuple[tuple[int, ...], ...]) -> list[list[int]]:
    n = len(B)
    return [[B[i][j] - int(i == j) for j in range(n)] for i in range(n)]


@dataclass(frozen=True)
class BieberbachGroup:
    """Lattice Gram matrix plus affine generators in lattice coordinates."""

    dim: int
    gram: tuple[tuple[Fraction, ...], ...]
    generators: tuple[tuple[tuple[tuple[int, ...], ...], tuple[Fraction, ...]], ...]

    def __init__(self, dim, gram, generators):
        object.__setattr__(self, "dim", int(dim))
        g = tuple(tuple(Fraction(x) for x in row) for row in gram)
        if len(g) != dim or any(len(r) != dim for r in g):
            raise ValueError("gram matrix must be dim x dim")
        if any(g[i][j] != g[j][i] for i in range(dim) for j in range(dim)):
            raise ValueError("gram matrix must be symmetric")
        object.__setattr__(self, "gram", g)
        gens = []
        for B, b in generators:
            Bt = tuple(tuple(int(x) for x in row) for row in B)
            bt = tuple(Fraction(x) for x in b)
            if len(Bt) != dim or any(len(r) != dim for r in Bt) or len(bt) != dim:
                raise ValueError("generator shape mismatch")
            gens.append((Bt, bt))
        object.__setattr__(self, "generators", tuple(gens))

    # -- coset representatives -------------------------------------

    def point_group(self, max_order: int = 1024):
        """Coset representatives (B, b mod Z^n) of the group over its lattice.

        Returns (reps, defects): reps always contains the identity first;
        defects lists closure problems (non-finite point group, or a pure
        non-lattice translation, meaning Z^n is not the full translation
        lattice of the presented group).
        """
        n = self.dim
        ident = tuple(tuple(int(i == j) for j in range(n)) for i in range(n))
        reps: dict = {ident: tuple(Fraction(0) for _ in range(n))}
        defects: list[str] = []
        frontier = [(ident, reps[ident])]
        while frontier:
            newfront = []
            for B0, b0 in frontier:
                for gi, (B1, b1) in enumerate(self.generators):
                    # (B1, b1) * (B0, b0) = (B1 B0, B1 b0 + b1)
                    B = tuple(tuple(sum(B1[i][k] * B0[k][j] for k in range(n))
                                    for j in range(n)) for i in range(n))
                    b = tuple((sum(Fraction(B1[i][k]) * b0[k] for k in range(n)) + b1[i]) % 1
                              for i in range(n))
                    if B in reps:
                        if reps[B] != b:
                            defects.append(
                                f"coset of generator {gi}: two translation parts "
                                f"{reps[B]} vs {b} for the same point-group element")
                        continue
                    reps[B] = b
                    newfront.append((B, b))
                    if len(reps) > max_order:
                        defects.append("point group exceeds closure bound; not finite?")
                        return list(reps.items()), defects
            frontier = newfront
        ordered = [(ident, reps[ident])] + [(B, b) for B, b in reps.items() if B != ident]
        return ordered, defects

    def gram_list(self) -> Matrix:
        return [list(row) for row in self.gram]

    def __repr__(self):
        return f"BieberbachGroup(dim={self.dim}, |gens|={len(self.generators)})"


def projection_onto_kernel(B, gram: Matrix) -> Matrix:
    """G-orthogonal projection onto ker(B - Id), exact."""
    n = len(B)
    K = _nullspace(_mat(_b_minus_id(B)))
    if not K:
        return [[Fraction(0)] * n for _ in range(n)]
    Km = _transpose(K)  # n x d with basis as columns
    KtG = _matmul(_transpose(Km), gram)
    M = _matmul(KtG, Km)  # d x d SPD
    Minv = _inverse(M)
    return _matmul(Km, _matmul(Minv, KtG))


# ----------------------------------------------------------------------
# validation
# ----------------------------------------------------------------------


@dataclass
class ValidationReport:
    valid: bool
    failures: list[str] = field(default_factory=list)
    point_group_order: int = 0

    def __bool__(self):
        return self.valid


def validate(g: BieberbachGroup) -> ValidationReport:
    """Structural checks: G-isometry, kernel/image orthogonality, lattice rank
    of the fixed space, and torsion-freeness (no element with holonomy fixes a
    point, tested by exact integer solvability over the whole lattice orbit).
    """
    failures = []
    gram = g.gram_list()
    reps, defects = g.point_group()
    failures.extend(defects)
    n = g.dim

    for idx, (B, b) in enumerate(reps):
        Bm = _mat(B)
        lhs = _matmul(_transpose(Bm), _matmul(gram, Bm))
        if lhs != gram:
            failures.append(f"coset {idx}: B is not a G-isometry (B^T G B != G)")
            continue
        bmi = _b_minus_id(B)
        if all(all(x == 0 for x in row) for row in bmi):
            continue  # identity coset: pure lattice translations
        ker = _nullspace(_mat(bmi))
        img = _column_space_basis(_mat(bmi))
        if len(ker) + len(img) != n:
            failures.append(f"coset {idx}: rank-nullity mismatch")
        for u in ker:
            for w in img:
                if sum(u[i] * sum(gram[i][j] * w[j] for j in range(n)) for i in range(n)) != 0:
                    failures.append(
                        f"coset {idx}: ker(B-Id) not G-orthogonal to image(B-Id)")
                    break
        ik = _integer_kernel(bmi)
        if len(ik) != len(ker):
            failures.append(f"coset {idx}: lattice rank of fixed space "
                            f"{len(ik)} != kernel dimension {len(ker)}")
        # torsion-freeness: some lattice translate of b landing inside
        # image(B - Id) would give a fixed point
        left_null = _nullspace(_mat(_transpose(_mat(bmi))))
        if left_null:
            A = _clear_denominators(left_null)
            t = [-sum(Fraction(A[r][j]) * b[j] for j in range(n)) for r in range(len(A))]
            if all(x.denominator == 1 for x in t):
                if _solvable_over_Z(A, [int(x) for x in t]):
                    failures.append(
                        f"coset {idx}: fixed point exists (projection of the "
                        "translation part onto the fixed space vanishes for "
                        "some lattice translate); group has torsion")
    return ValidationReport(valid=not failures, failures=failures,
                            point_group_order=len(reps))


# ----------------------------------------------------------------------
# length spectrum
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class FlatComponent:
    """One fixed-velocity family: coset representative plus the projected
    translation vector whose G-norm is the geodesic length."""

    coset_index: int
    b_plus: tuple[Fraction, ...]
    length_sq: Fraction
    fix_dim: int


@dataclass(frozen=True)
class FlatComponentGroup:
    coset_index: int
    fix_dim: int
    count: int
    vectors: tuple[tuple[Fraction, ...], ...]
    lattice_conjugacy_index: int


@dataclass(frozen=True)
class FlatLengthEntry:
    length_sq: Fraction
    groups: tuple[FlatComponentGroup, ...]

    @property
    def length(self) -> float:
        return math.sqrt(float(self.length_sq))


def _ldl(q: Matrix):
    """Q = L^T D L with unit upper-triangular L (returned row-wise) and
    positive diagonal D, all exact; raises if Q is not positive definite."""
    n = len(q)
    q = [row[:] for row in q]
    D = [Fraction(0)] * n
    L = _identity(n)
    for i in range(n):
        D[i] = q[i][i]
        if D[i] <= 0:
            raise ArithmeticError("form not positive definite")
        for j in range(i + 1, n):
            L[i][j] = q[i][j] / D[i]
        for j in range(i + 1, n):
            for k in range(j, n):
                q[j][k] -= q[i][j] * q[i][k] / D[i]
                q[k][j] = q[j][k]
    return D, L


def _enumerate_form(q: Matrix, offset: Sequence[Fraction], bound: Fraction):
    """All integer vectors u with Q(u + offset) <= bound, exact.

    Fincke-Pohst walk on the LDL decomposition; float interval guesses are
    widened by one step and every candidate is filtered exactly.
    """
    n = len(q)
    D, L = _ldl(q)
    out: list[tuple[int, ...]] = []
    u = [0] * n

    def rec(i: int, remaining: Fraction):
        if i < 0:
            out.append(tuple(u))
            return
        # center_i = offset_i + sum_{j>i} L[i][j] (u_j + offset_j)
        center = offset[i] + sum(L[i][j] * (u[j] + offset[j]) for j in range(i + 1, n))
        radius = math.sqrt(float(remaining / D[i])) if remaining > 0 else 0.0
        lo = math.floor(-float(center) - radius) - 1
        hi = math.ceil(-float(center) + radius) + 1
        for ui in range(lo, hi + 1):
            term = D[i] * (ui + center) ** 2
            if term <= remaining:
                u[i] = ui
                rec(i - 1, remaining - term)
        u[i] = 0

    rec(n - 1, Fraction(bound))
    return out


def length_spectrum_flat(g: BieberbachGroup, max_length: float) -> list[FlatLengthEntry]:
    """Sorted distinct lengths up to max_length with their component groups.

    Per coset (B, b) the squared length of (B, b + lam) depends on lam only
    through its fixed-space part, so the walk runs over the fixed-space
    lattice for each residue class of Z^n modulo (fixed lattice + saturated
    image lattice); the transverse fiber contributes conjugate copies counted
    by `lattice_conjugacy_index`, reported but not expanded.
    """
    if max_length <= 0:
        raise ValueError("max_length must be positive")
    gram = g.gram_list()
    n = g.dim
    bound = Fraction(max_length) ** 2
    reps, defects = g.point_group()
    if defects:
        raise ValueError("group closure failed: " + "; ".join(defects))

    hits: dict[Fraction, dict[int, set]] = {}
    conj_index: dict[int, int] = {}
    fix_dims: dict[int, int] = {}

    for idx, (B, b) in enumerate(reps):
        bmi = _b_minus_id(B)
        is_identity = all(all(x == 0 for x in row) for row in bmi)
        if is_identity:
            fix_dims[idx] = n
            conj_index[idx] = 1
            for u in _enumerate_form(gram, [Fraction(0)] * n, bound):
                if all(x == 0 for x in u):
                    continue
                vec = tuple(Fraction(x) for x in u)
                lsq = sum(vec[i] * sum(gram[i][j] * vec[j] for j in range(n))
                          for i in range(n))
                if 0 < lsq <= bound:
                    hits.setdefault(lsq, {}).setdefault(idx, set()).add(vec)
            continue

        K = _integer_kernel(bmi)
        d = len(K)
        fix_dims[idx] = d
        left_null = _nullspace(_mat(_transpose(_mat(bmi))))
        Isat = _integer_kernel(_clear_denominators(left_null)) if left_null else []
        # index of (B-Id)Z^n inside the saturated image lattice
        if Isat:
            # rows: coordinates of (B-Id)e_r in the saturated image basis
            IsatM = _transpose(_mat(Isat))  # n x (n-d)
            coords = []
            for r in range(n):
                col = [Fraction(bmi[i][r]) for i in range(n)]
                sol = _solve(IsatM, col)
                coords.append([int(x) for x in sol])
            _, S, _ = _smith_normal_form(coords)
            ci = 1
            for i in range(min(len(S), len(S[0]) if S else 0)):
                if S[i][i]:
                    ci *= abs(S[i][i])
            conj_index[idx] = ci
        else:
            conj_index[idx] = 1

        if d == 0:
            continue  # no fixed directions: contributes no closed geodesics

        Km = _transpose(_mat(K))  # n x d
        QK = _matmul(_transpose(Km), _matmul(gram, Km))
        proj = projection_onto_kernel(B, gram)

        # residues of Z^n modulo (K + Isat)
        M = [[Fraction(0)] * n for _ in range(n)]
        basis_cols = K + Isat
        if len(basis_cols) != n:
            raise ArithmeticError("fixed + image lattices do not span")
        for j, col in enumerate(basis_cols):
            for i in range(n):
                M[i][j] = Fraction(col[i])
        Mint = [[int(M[i][j]) for j in range(n)] for i in range(n)]
        U, S, V = _smith_normal_form(Mint)
        Uinv = _inverse(_mat(U))
        residues = []
        diag = [abs(S[i][i]) if S[i][i] else 1 for i in range(n)]

        def gen_res(i, cur):
            if i == n:
                residues.append(tuple(cur))
                return
            for y in range(diag[i]):
                row = [Uinv[r][i] * y for r in range(n)]
                gen_res(i + 1, [c + rr for c, rr in zip(cur, row)])

        gen_res(0, [Fraction(0)] * n)

        for res in residues:
            shifted = [b[i] + res[i] for i in range(n)]
            c = _matvec(proj, shifted)  # in ker(B - Id)
            y0 = _solve(Km, c)
            if y0 is None:
                raise ArithmeticError("projection left the fixed space")
            for u in _enumerate_form(QK, y0, bound):
                yv = [Fraction(u[j]) + y0[j] for j in range(d)]
                b_plus = tuple(sum(Km[i][j] * yv[j] for j in range(d)) for i in range(n))
                lsq = sum(b_plus[i] * sum(gram[i][j] * b_plus[j] for j in range(n))
                          for i in range(n))
                if 0 < lsq <= bound:
                    hits.setdefault(lsq, {}).setdefault(idx, set()).add(b_plus)

    entries = []
    for lsq in sorted(hits):
        groups = []
        for idx in sorted(hits[lsq]):
            vecs = tuple(sorted(hits[lsq][idx]))
            groups.append(FlatComponentGroup(
                coset_index=idx, fix_dim=fix_dims[idx], count=len(vecs),
                vectors=vecs, lattice_conjugacy_index=conj_index[idx]))
        entries.append(FlatLengthEntry(length_sq=lsq, groups=tuple(groups)))
    return entries


# ----------------------------------------------------------------------
# cleanliness diagnostic
# ----------------------------------------------------------------------


def linearized_return_map_kernel(B) -> dict:
    """Kernel data of the block map (X, Y) -> (B X + tau B Y - X, B Y - Y).

    Y must lie in ker(B-Id) with tau*Y in image(B-Id), and each admissible Y
    leaves a ker(B-Id)-sized family of X, so for any tau != 0 the kernel
    dimension is dim ker(B-Id) + dim(ker(B-Id) /\\ image(B-Id)).  Clean means
    the intersection term vanishes, leaving exactly the fixed-torus tangent.
    """
    bmi = _mat(_b_minus_id(B))
    ker = _nullspace(bmi)
    img = _column_space_basis(bmi)
    stacked = ker + img
    dim_sum = _rank(stacked) if stacked else 0
    inter = len(ker) + len(img) - dim_sum
    return {
        "fix_dim": len(ker),
        "kernel_dim": len(ker) + inter,
        "pass": inter == 0,
    }


def cleanliness_diagnostic(g: BieberbachGroup, entry: FlatLengthEntry) -> list[dict]:
    """Exact rank check of the linearized return map at each component.

    A holonomy matrix of finite order over the rationals always passes; an
    invalid input (e.g. a shear fed in with validation disabled) makes the
    intersection term positive and FAILs.
    """
    reps, _ = g.point_group()
    out = []
    for grp in entry.groups:
        B, _ = reps[grp.coset_index]
        row = linearized_return_map_kernel(B)
        row["coset_index"] = grp.coset_index
        row["pass"] = row["kernel_dim"] == grp.fix_dim
        out.append(row)
    return out


# ----------------------------------------------------------------------
# JSON interface and example groups
# ----------------------------------------------------------------------


def group_from_jsonable(data: dict) -> BieberbachGroup:
    """{"dim": n, "gram": [["1","0"],...], "generators": [{"B": [[...]], "b": ["1/2",...]}]}"""
    dim = int(data["dim"])
    gram = [[Fraction(str(x)) for x in row] for row in data["gram"]]
    gens = [
        ([[int(x) for x in row] for row in gen["B"]],
         [Fraction(str(x)) for x in gen["b"]])
        for gen in data.get("generators", [])
    ]
    return BieberbachGroup(dim, gram, gens)


def load_group(path: str) -> BieberbachGroup:
    with open(path) as fh:
        return group_from_jsonable(json.load(fh))


def entry_to_jsonable(entry: FlatLengthEntry) -> dict:
    return {
        "length_squared": str(entry.length_sq),
        "length_float": entry.length,
        "components": [
            {
                "B_index": g.coset_index,
                "fix_dim": g.fix_dim,
                "count": g.count,
                "lattice_conjugacy_index": g.lattice_conjugacy_index,
            }
            for g in entry.groups
        ],
    }


def square_torus(n: int) -> BieberbachGroup:
    return BieberbachGroup(n, _identity(n), [])


def klein_bottle() -> BieberbachGroup:
    return BieberbachGroup(
        2, _identity(2),
        [([[1, 0], [0, -1]], [Fraction(1, 2), Fraction(0)])])


def quarter_turn_space() -> BieberbachGroup:
    """3-dimensional flat manifold with holonomy Z/4: quarter turn in the
    first two coordinates, quarter-period shift along the third."""
    B = [[0, -1, 0], [1, 0, 0], [0, 0, 1]]
    return BieberbachGroup(3, _identity(3), [(B, [0, 0, Fraction(1, 4)])])
