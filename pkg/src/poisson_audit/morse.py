"""Morse index (free loop space) of every closed-geodesic family on a lens space.

The index splits as fixed-endpoint index + boundary corrections + the index of
the concavity form.  On the sphere cover conjugate points sit at multiples of
pi with multiplicity 2n-2, so the fixed-endpoint part counts pi-crossings:
ind_omega = (2n-2) * floor(tau/pi) for lengths that are not multiples of pi.
(The alternative bookkeeping (2n-2) * (floor(tau/pi) - 1) that applies at
whole multiples of pi would make the shortest geodesics carry negative index;
cross-checks pin the convention used here, see `OMEGA_INDEX_CONVENTION`.)

The concavity index is an exact integer count of rotation exponents whose
deck-rotation cosine exceeds cos(tau) on the correct side of sin(tau); it is
orientation independent and winding independent (each extra winding multiplies
the deck element by a full period, flipping cosine and sine signs together).
"""

from __future__ import annotations

from dataclasses import dataclass

from .exactnum import dist_q
from .lens import FullFlowComponent, GeodesicComponent, LensSpace

# floor(tau/pi) counts interior conjugate points for non-pi-multiple lengths.
OMEGA_INDEX_CONVENTION = "floor(tau/pi)"


@dataclass(frozen=True)
class MorseBreakdown:
    ind_omega: int
    mu_tau: int
    kernel_term: int
    concavity: int

    @property
    def total(self) -> int:
        return self.ind_omega + self.mu_tau - self.kernel_term + self.concavity

    @property
    def sign(self) -> int:
        """i^(-total); the total is always even so this is +-1."""
        if self.total % 2:
            raise ArithmeticError(f"odd Morse index {self.total}")
        return -1 if (self.total // 2) % 2 else 1


def index_full(lens: LensSpace, multiple: int) -> MorseBreakdown:
    """Index of a whole-period geodesic: tau = 2*pi*k (q odd) or pi*k (q even).

    The flow fixes the whole unit tangent bundle, the concavity form vanishes,
    and the boundary kernel term is maximal (2n-2).
    """
    if multiple < 1:
        raise ValueError("multiple must be >= 1")
    n = lens.n
    floor_tau_pi = 2 * multiple if lens.q % 2 else multiple
    return MorseBreakdown(
        ind_omega=(2 * n - 2) * (floor_tau_pi - 1),
        mu_tau=2 * n - 2,
        kernel_term=2 * n - 2,
        concavity=0,
    )


def concavity_index(c: GeodesicComponent) -> int:
    """Index of the concavity form: 2 * #{ p_i : cos(2*pi*k*p_i/q) / sin(tau)
    > cos(tau) / sin(tau) }, decided by exact residue comparisons.

    Class members sit exactly on the boundary cosine and never count (strict
    inequality).  The count is computed from the canonical realizer of the
    underlying class; combined with the matching deck element it is the same
    for every winding, and flipping the realizer k <-> q-k leaves it unchanged.
    """
    if isinstance(c, FullFlowComponent):
        raise ValueError("concavity form is computed via index_full at whole periods")
    lens, q, l = c.lens, c.lens.q, c.l
    k = c.realizer_canonical
    dl = dist_q(l, q)
    sin_positive = 2 * (l % q) < q
    count = 0
    for pi_ in lens.p:
        d = dist_q(pi_ * k, q)
        if (d < dl) if sin_positive else (d > dl):
            count += 1
    return 2 * count


def index_short(c: GeodesicComponent) -> MorseBreakdown:
    """Index of a short-geodesic component (tau not a multiple of pi).

    No Jacobi field vanishes at both endpoints at such times (mu = 0), and the
    linearized fixed space is a graph over the horizontal slot, so the kernel
    correction is 0.
    """
    if isinstance(c, FullFlowComponent):
        raise ValueError("use index_full for whole-period lengths")
    lens = c.lens
    n = lens.n
    if lens.q % 2:
        floor_tau_pi = 2 * c.winding + (1 if 2 * c.l > lens.q else 0)
    else:
        floor_tau_pi = c.winding  # 2l < q, so the fractional part stays below pi
    return MorseBreakdown(
        ind_omega=(2 * n - 2) * floor_tau_pi,
        mu_tau=0,
        kernel_term=0,
        concavity=concavity_index(c),
    )


def component_index(c) -> MorseBreakdown:
    """Dispatch on component kind."""
    if isinstance(c, FullFlowComponent):
        return index_full(c.lens, c.multiple)
    return index_short(c)
