"""Lattice of relative disc classes attached to a link.

The classes live in the free abelian group on one generator per complement
region; a class is an integer coefficient vector (c_1, ..., c_s).  Its
numerical invariants are the three linear forms

    maslov = 2 * sum(c_i)
    delta  = sum(2 * (k_i - 1) * c_i)          (diagonal intersection)
    area   = sum(c_i * A_i)

together with the divisor intersections, which coincide with the
coefficients themselves.  On an eta-monotone link these satisfy the exact
identity  area + eta * delta == (lambda / 2) * maslov  for every class.

For classes with non-negative coefficients, `riemann_hurwitz` performs the
branched-cover index bookkeeping: the Euler characteristic of the
tautological cover is chi = k - delta, and the dimension identity

    k + maslov == (chi + 2 * sum((2 - k_i) * c_i)) + 2 * delta

is exposed as a checkable equation.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .rationals import parse_fraction
from .surface_link import LinkError, SurfaceLink, check_monotone, require_valid

__all__ = [
    "DiscClass",
    "ClassInvariants",
    "CoverData",
    "class_invariants",
    "check_monotonicity_identity",
    "riemann_hurwitz",
]


@dataclass(frozen=True)
class DiscClass:
    """Integer class sum(c_i * [u_i]) relative to a fixed link."""

    link: SurfaceLink
    coeffs: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(int(c) for c in self.coeffs))
        if len(self.coeffs) != self.link.s:
            raise LinkError(
                f"class has {len(self.coeffs)} coefficients, link has s={self.link.s}"
            )

    def __add__(self, other: "DiscClass") -> "DiscClass":
        if other.link is not self.link and other.link != self.link:
            raise LinkError("cannot add classes attached to different links")
        return DiscClass(self.link, tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __rmul__(self, n: int) -> "DiscClass":
        return DiscClass(self.link, tuple(int(n) * c for c in self.coeffs))


@dataclass(frozen=True)
class ClassInvariants:
    maslov: int
    area: Fraction
    delta: int
    divisor_intersections: tuple[int, ...]


@dataclass(frozen=True)
class CoverData:
    chi: int                 # Euler characteristic of the tautological cover
    branch_points: int       # = delta of the class
    vdim_disc_plus_3: int    # k + maslov
    vdim_cover: int          # chi + 2 * sum((2 - k_i) c_i)
    identity_holds: bool     # vdim_disc_plus_3 == vdim_cover + 2 * branch_points


def _counts(link: SurfaceLink) -> list[int]:
    return [r.boundary_count for r in link.regions]


def class_invariants(link: SurfaceLink, cls: DiscClass) -> ClassInvariants:
    require_valid(link)
    if cls.link != link:
        raise LinkError("class is attached to a different link")
    counts = _counts(link)
    maslov = 2 * sum(cls.coeffs)
    delta = sum(2 * (kc - 1) * c for kc, c in zip(counts, cls.coeffs))
    area = sum((c * a for c, a in zip(cls.coeffs, link.areas)), Fraction(0))
    return ClassInvariants(
        maslov=maslov, area=area, delta=delta, divisor_intersections=cls.coeffs
    )


def check_monotonicity_identity(link: SurfaceLink, eta, cls: DiscClass) -> bool:
    """Exact test of area + eta*delta == (lambda/2)*maslov on a monotone link."""
    eta = parse_fraction(eta)
    report = check_monotone(link, eta)
    if not report.is_monotone:
        raise LinkError(f"link is not {eta}-monotone")
    inv = class_invariants(link, cls)
    return inv.area + eta * inv.delta == Fraction(report.lam, 2) * inv.maslov


def riemann_hurwitz(link: SurfaceLink, cls: DiscClass) -> CoverData:
    require_valid(link)
    if any(c < 0 for c in cls.coeffs):
        raise LinkError("riemann_hurwitz requires non-negative coefficients")
    counts = _counts(link)
    k = link.k
    delta = sum(2 * (kc - 1) * c for kc, c in zip(counts, cls.coeffs))
    chi = k - delta
    maslov = 2 * sum(cls.coeffs)
    vdim_disc_plus_3 = k + maslov
    vdim_cover = chi + 2 * sum((2 - kc) * c for kc, c in zip(counts, cls.coeffs))
    return CoverData(
        chi=chi,
        branch_points=delta,
        vdim_disc_plus_3=vdim_disc_plus_3,
        vdim_cover=vdim_cover,
        identity_holds=(vdim_disc_plus_3 == vdim_cover + 2 * delta),
    )
