"""Combinatorial model of Lagrangian links on closed surfaces.

A link is a disjoint union of circles on a closed genus-g surface whose
complement closes up into planar regions.  The data kept here is purely
combinatorial (region/circle incidences) plus exact rational areas; the only
geometric realization supported is the cylinder model of the sphere,

    S^2  ~  [0,1]_z x (R/Z)_theta,   area form dz ^ dtheta,  total area 1,

in which a horizontal circle at height z bounds a disc of area z below it.
Circles either sit at an exact z-level or carry a declared z-range (the
vertical extent of the disc they bound); planarity of regions is declared by
the caller and only Euler-characteristic consistency is verified.

Monotonicity: a link is eta-monotone when 2*eta*(k_j - 1) + A_j takes the
same value lambda for every complement region (k_j = number of boundary
circles of region j, A_j its area).  All such checks are exact rational
equality tests.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional

from .rationals import format_fraction, parse_fraction

__all__ = [
    "Surface",
    "Circle",
    "Region",
    "SurfaceLink",
    "ValidationReport",
    "MonotonicityReport",
    "LinkError",
    "validate_link",
    "check_monotone",
    "infer_eta",
    "lambda_closed_form",
    "build_parallel_link",
    "build_equidistributed_sequence",
    "equidistributed_eta_bound",
    "random_valid_link",
    "link_to_dict",
    "link_from_dict",
]


class LinkError(ValueError):
    """Raised when an operation's precondition on the link data fails."""


@dataclass(frozen=True)
class Surface:
    genus: int
    total_area: Fraction = Fraction(1)

    def __post_init__(self):
        object.__setattr__(self, "total_area", Fraction(self.total_area))


@dataclass(frozen=True)
class Circle:
    """One link component.

    `level` is the exact z-level of a horizontal circle in the cylinder
    model; `z_range` the vertical extent of a non-horizontal circle.  Either
    may be None for purely combinatorial links; quadrature-facing operations
    require one of them.  `diameter` is declared metadata (an upper bound on
    the diameter of the disc the circle bounds), not verified geometry.
    """

    id: str
    contractible: bool = True
    level: Optional[Fraction] = None
    z_range: Optional[tuple[Fraction, Fraction]] = None
    diameter: Optional[Fraction] = None
    orientation: int = 1

    def __post_init__(self):
        if self.level is not None:
            object.__setattr__(self, "level", Fraction(self.level))
        if self.z_range is not None:
            lo, hi = self.z_range
            object.__setattr__(self, "z_range", (Fraction(lo), Fraction(hi)))
        if self.diameter is not None:
            object.__setattr__(self, "diameter", Fraction(self.diameter))

    @property
    def realized(self) -> bool:
        return self.level is not None or self.z_range is not None

    def z_extent(self) -> tuple[Fraction, Fraction]:
        if self.level is not None:
            return (self.level, self.level)
        if self.z_range is not None:
            return self.z_range
        raise LinkError(f"circle {self.id!r} has no geometric realization")


@dataclass(frozen=True)
class Region:
    """A complement region with its (circle id, incidence sign) boundary."""

    id: str
    area: Fraction
    boundary: tuple[tuple[str, int], ...]

    def __post_init__(self):
        object.__setattr__(self, "area", Fraction(self.area))
        object.__setattr__(
            self, "boundary", tuple((str(c), int(s)) for c, s in self.boundary)
        )

    @property
    def boundary_count(self) -> int:
        return len(self.boundary)


@dataclass(frozen=True)
class SurfaceLink:
    surface: Surface
    circles: tuple[Circle, ...]
    regions: tuple[Region, ...]

    def __post_init__(self):
        object.__setattr__(self, "circles", tuple(self.circles))
        object.__setattr__(self, "regions", tuple(self.regions))

    @property
    def k(self) -> int:
        return len(self.circles)

    @property
    def s(self) -> int:
        return len(self.regions)

    def circle_index(self, circle_id: str) -> int:
        for i, c in enumerate(self.circles):
            if c.id == circle_id:
                return i
        raise KeyError(circle_id)

    def circle(self, circle_id: str) -> Circle:
        return self.circles[self.circle_index(circle_id)]

    @property
    def areas(self) -> tuple[Fraction, ...]:
        return tuple(r.area for r in self.regions)


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[str, ...] = ()
    warnings: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations


@dataclass(frozen=True)
class MonotonicityReport:
    eta: Fraction
    values: tuple[Fraction, ...]
    is_monotone: bool
    lam: Optional[Fraction]  # common value of 2*eta*(k_j-1) + A_j, if any


def validate_link(link: SurfaceLink) -> ValidationReport:
    """Check every structural invariant; violations are data, not errors."""
    violations: list[str] = []
    warnings: list[str] = []

    g = link.surface.genus
    if g < 0:
        violations.append(f"genus must be non-negative, got {g}")
    if link.surface.total_area <= 0:
        violations.append("total_area must be positive")

    ids = [c.id for c in link.circles]
    if len(set(ids)) != len(ids):
        violations.append("duplicate circle ids")
    region_ids = [r.id for r in link.regions]
    if len(set(region_ids)) != len(region_ids):
        violations.append("duplicate region ids")

    k, s = link.k, link.s
    if s < 2:
        violations.append(f"need at least two complement regions, got s={s}")
    if s != k - g + 1:
        violations.append(f"Euler count s=k-g+1 fails: s={s}, k-g+1={k - g + 1}")
    chi = sum(2 - r.boundary_count for r in link.regions)
    if chi != 2 - 2 * g:
        violations.append(f"sum(2-k_j)={chi} but Euler characteristic is {2 - 2 * g}")

    area_sum = sum((r.area for r in link.regions), Fraction(0))
    if area_sum != link.surface.total_area:
        violations.append(
            f"region areas sum to {format_fraction(area_sum)}, "
            f"expected {format_fraction(link.surface.total_area)}"
        )
    for r in link.regions:
        if r.area <= 0:
            violations.append(f"region {r.id!r} has non-positive area")

    known = set(ids)
    incidences: dict[str, list[tuple[str, int]]] = {c: [] for c in known}
    for r in link.regions:
        for cid, sign in r.boundary:
            if sign not in (1, -1):
                violations.append(f"region {r.id!r}: incidence sign must be +-1")
            if cid not in known:
                violations.append(f"region {r.id!r} references unknown circle {cid!r}")
            else:
                incidences[cid].append((r.id, sign))
    for cid, inc in incidences.items():
        if len(inc) != 2:
            violations.append(
                f"circle {cid!r} has {len(inc)} boundary incidences, expected 2"
            )
            continue
        (r0, s0), (r1, s1) = inc
        if r0 == r1:
            if s0 + s1 != 0:
                violations.append(
                    f"circle {cid!r} meets region {r0!r} twice with equal signs"
                )
            warnings.append(
                f"circle {cid!r} bounds region {r0!r} on both sides: "
                "degenerate for potential purposes (its variable drops out)"
            )

    return ValidationReport(tuple(violations), tuple(warnings))


def require_valid(link: SurfaceLink) -> None:
    report = validate_link(link)
    if not report.ok:
        raise LinkError("invalid link: " + "; ".join(report.violations))


def check_monotone(link: SurfaceLink, eta) -> MonotonicityReport:
    """Evaluate 2*eta*(k_j-1)+A_j per region; exact equality test."""
    eta = parse_fraction(eta)
    if eta < 0:
        raise LinkError(f"eta must be non-negative, got {eta}")
    require_valid(link)
    values = tuple(
        2 * eta * (r.boundary_count - 1) + r.area for r in link.regions
    )
    is_monotone = all(v == values[0] for v in values)
    return MonotonicityReport(
        eta=eta,
        values=values,
        is_monotone=is_monotone,
        lam=values[0] if is_monotone else None,
    )


def infer_eta(link: SurfaceLink) -> Optional[Fraction]:
    """Find an eta >= 0 making the link monotone, if one exists.

    The per-region values are affine in eta with slope 2(k_j - 1), so either
    all boundary counts agree (then monotone iff areas agree, any eta works
    and we return 0) or two distinct slopes pin eta down uniquely.
    """
    require_valid(link)
    counts = [r.boundary_count for r in link.regions]
    areas = list(link.areas)
    base = counts[0]
    pinned: Optional[Fraction] = None
    for kc, ar in zip(counts[1:], areas[1:]):
        if kc != base:
            pinned = Fraction(areas[0] - ar, 2 * (kc - base))
            break
    if pinned is None:
        return Fraction(0) if len(set(areas)) == 1 else None
    if pinned < 0:
        return None
    return pinned if check_monotone(link, pinned).is_monotone else None


def lambda_closed_form(k: int, eta) -> Fraction:
    """Monotonicity constant of a k-component monotone link on the unit-area
    sphere: (1 + 2*eta*(k-1)) / (k+1)."""
    eta = parse_fraction(eta)
    if k < 1:
        raise LinkError(f"need k >= 1, got {k}")
    if eta < 0:
        raise LinkError("eta must be non-negative")
    if k >= 2 and eta >= Fraction(1, 4):
        raise LinkError("monotone links with k >= 2 require eta < 1/4")
    return Fraction(1 + 2 * eta * (k - 1), k + 1)


def build_parallel_link(k: int, eta) -> SurfaceLink:
    """k parallel horizontal circles on the unit-area sphere.

    The circle levels are the partial sums of the region areas
    A_j = lambda - 2*eta*(k_j - 1): two polar discs of area lambda and k-1
    annuli of area lambda - 2*eta.  Incidence signs orient each polar circle
    as the boundary of its polar disc, interior circles as the upper
    boundary of the annulus below them.
    """
    lam = lambda_closed_form(k, eta)
    eta = parse_fraction(eta)
    annulus = lam - 2 * eta
    if k >= 2 and annulus <= 0:
        raise LinkError(f"(k={k}, eta={eta}) leaves no room for annuli")

    levels = []
    z = Fraction(0)
    for i in range(k):
        z += lam if i == 0 else annulus
        levels.append(z)
    circles = tuple(
        Circle(id=f"c{i + 1}", contractible=True, level=levels[i]) for i in range(k)
    )

    # Each circle appears with +1 exactly once: polar circles as boundaries
    # of their polar discs, interior circle c_j as the upper boundary of the
    # annulus below it.
    regions = [Region(id="B1", area=lam, boundary=(("c1", +1),))]
    for j in range(2, k + 1):
        upper_sign = +1 if j < k else -1
        regions.append(
            Region(
                id=f"B{j}",
                area=annulus,
                boundary=((f"c{j - 1}", -1), (f"c{j}", upper_sign)),
            )
        )
    top_sign = +1 if k >= 2 else -1
    regions.append(Region(id=f"B{k + 1}", area=lam, boundary=((f"c{k}", top_sign),)))

    link = SurfaceLink(Surface(genus=0), circles, tuple(regions))
    require_valid(link)
    return link


def equidistributed_eta_bound(m: int) -> Fraction:
    """Strict upper bound 1/(2m(m-1)) on eta for the m-disc family."""
    if m < 2:
        raise LinkError(f"the m-disc family requires m >= 2, got {m}")
    return Fraction(1, 2 * m * (m - 1))


def _stacked_disc_link(m: int, eta: Fraction) -> SurfaceLink:
    """m disjoint disc regions of equal area lambda_m plus their complement.

    Realization: the discs are smooth near-rectangles stacked in a single
    column of the cylinder, each of width 1 - C/4 and height
    lambda*(1+C/4)/... chosen so the declared z-extent h satisfies h < 2*lambda
    and the column (with equal gaps) is exactly centred: the mean of the
    disc mid-heights is 1/2.  C = 1 - m*lambda is the complement area.
    All realization data is exact rational.
    """
    lam = Fraction(1 + 2 * eta * (m - 1), m + 1)
    complement = 1 - m * lam
    if complement <= 0:
        raise LinkError("eta too large: complement area must stay positive")

    margin = complement / 4
    width = 1 - margin
    height = lam * (1 + margin) / width
    stack = m * height
    if stack >= 1:
        raise LinkError("internal: stacked discs exceed the cylinder height")
    gap = (1 - stack) / (m + 1)

    circles = []
    for j in range(1, m + 1):
        lo = j * gap + (j - 1) * height
        circles.append(
            Circle(
                id=f"c{j}",
                contractible=True,
                z_range=(lo, lo + height),
                diameter=width + height,
            )
        )
    regions = [
        Region(id=f"B{j}", area=lam, boundary=((f"c{j}", +1),)) for j in range(1, m + 1)
    ]
    regions.append(
        Region(
            id=f"B{m + 1}",
            area=complement,
            boundary=tuple((f"c{j}", -1) for j in range(1, m + 1)),
        )
    )
    link = SurfaceLink(Surface(genus=0), tuple(circles), tuple(regions))
    require_valid(link)
    return link


def build_equidistributed_sequence(
    m_max: int, eta_rule: Callable[[int], object] | None = None, m_min: int = 2
) -> list[SurfaceLink]:
    """The m-disc links for m = m_min..m_max, disc area
    lambda_m = 1/(m+1) + 2*eta_m*(m-1)/(m+1).

    `eta_rule(m)` must return a rational eta_m with
    0 <= eta_m < 1/(2m(m-1)); the default is identically zero.
    """
    if m_min < 2:
        raise LinkError("the m-disc family requires m >= 2")
    links = []
    for m in range(m_min, m_max + 1):
        eta = parse_fraction(eta_rule(m)) if eta_rule is not None else Fraction(0)
        if eta < 0 or eta >= equidistributed_eta_bound(m):
            raise LinkError(
                f"eta rule violates the bound at m={m}: "
                f"need 0 <= eta < {format_fraction(equidistributed_eta_bound(m))}, "
                f"got {format_fraction(eta)}"
            )
        links.append(_stacked_disc_link(m, eta))
    return links


def random_valid_link(
    rng: random.Random,
    max_genus: int = 3,
    max_k: int = 12,
    allow_loops: bool = True,
) -> SurfaceLink:
    """Random well-formed link via the configuration model.

    Regions are vertices with prescribed degrees k_j >= 1 summing to 2k,
    circles are edges given by a random perfect matching of the incidence
    slots.  Areas are random positive rationals summing to 1 exactly.
    """
    g = rng.randint(0, max_genus)
    k = rng.randint(max(1, g + 1), max(max_k, g + 1))
    s = k - g + 1

    pairs = None
    for _ in range(200):
        # composition of 2k into s parts >= 1; a loop-free matching needs no
        # region to hold more than half of the 2k incidence slots
        counts = [1] * s
        for _ in range(2 * k - s):
            counts[rng.randrange(s)] += 1
        if not allow_loops and max(counts) > k:
            continue
        slots = [j for j, c in enumerate(counts) for _ in range(c)]
        for _ in range(50):
            rng.shuffle(slots)
            cand = [(slots[2 * i], slots[2 * i + 1]) for i in range(k)]
            if allow_loops or all(a != b for a, b in cand):
                pairs = cand
                break
        if pairs is not None:
            break
    if pairs is None:
        raise LinkError("could not draw a loop-free matching for these degrees")

    weights = [rng.randint(1, 50) for _ in range(s)]
    total = sum(weights)
    areas = [Fraction(w, total) for w in weights]

    boundary: list[list[tuple[str, int]]] = [[] for _ in range(s)]
    for i, (a, b) in enumerate(pairs):
        cid = f"c{i + 1}"
        boundary[a].append((cid, +1))
        boundary[b].append((cid, -1))
    regions = tuple(
        Region(id=f"B{j + 1}", area=areas[j], boundary=tuple(boundary[j]))
        for j in range(s)
    )
    circles = tuple(Circle(id=f"c{i + 1}", contractible=(g == 0)) for i in range(k))
    return SurfaceLink(Surface(genus=g), circles, regions)


# ---------------------------------------------------------------------------
# JSON wire format


def link_to_dict(link: SurfaceLink) -> dict:
    circles = []
    for c in link.circles:
        entry: dict = {"id": c.id, "contractible": c.contractible}
        if c.level is not None:
            entry["z"] = format_fraction(c.level)
        if c.z_range is not None:
            entry["z_range"] = [format_fraction(c.z_range[0]), format_fraction(c.z_range[1])]
        if c.diameter is not None:
            entry["diameter"] = format_fraction(c.diameter)
        circles.append(entry)
    return {
        "genus": link.surface.genus,
        "total_area": format_fraction(link.surface.total_area),
        "circles": circles,
        "regions": [
            {
                "id": r.id,
                "area": format_fraction(r.area),
                "boundary": [[cid, sign] for cid, sign in r.boundary],
            }
            for r in link.regions
        ],
    }


def link_from_dict(data: dict) -> SurfaceLink:
    try:
        surface = Surface(
            genus=int(data["genus"]),
            total_area=parse_fraction(data.get("total_area", 1)),
        )
        circles = []
        for c in data["circles"]:
            circles.append(
                Circle(
                    id=str(c["id"]),
                    contractible=bool(c.get("contractible", True)),
                    level=parse_fraction(c["z"]) if "z" in c else None,
                    z_range=(
                        (parse_fraction(c["z_range"][0]), parse_fraction(c["z_range"][1]))
                        if "z_range" in c
                        else None
                    ),
                    diameter=parse_fraction(c["diameter"]) if "diameter" in c else None,
                )
            )
        regions = []
        for r in data["regions"]:
            regions.append(
                Region(
                    id=str(r["id"]),
                    area=parse_fraction(r["area"]),
                    boundary=tuple((str(c), int(sgn)) for c, sgn in r["boundary"]),
                )
            )
    except (KeyError, TypeError, ValueError) as exc:
        raise LinkError(f"malformed link data: {exc}") from exc
    return SurfaceLink(surface, tuple(circles), tuple(regions))
