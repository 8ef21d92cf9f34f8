"""Homogenized invariants on the sphere and their arithmetic.

Homogenizing the link spectral invariant of a k-component eta-monotone link
gives a homogeneous quasimorphism with defect 2(k+1)lambda/k, where lambda
is the monotonicity constant (1+2 eta (k-1))/(k+1).  Everything here is the
computable layer of that statement:

* exact defect arithmetic and the duality bound c(H) + c(H-bar) <= (k+1)l/k;
* homogenization of autonomous mean-normalized Hamiltonians, where
  H^{#n} = n.H makes c(nH)/n finite data with certified error
  (k+1)lambda/(k n);
* the divergent stable-commutator-length table built from a thin-band
  family against the equator plus 2n-1 equally spaced levels;
* linear-independence witnesses: two-lobe bump Hamiltonians concentrated at
  the distinguishing circle of each link, evaluating to the identity matrix
  across the family;
* the small-support vanishing witness behind the fragmentation-norm bound.

The scl and witness tables run entirely in exact rational arithmetic: the
Hamiltonians are piecewise-linear profiles with rational nodes, the links
have rational levels, and every spectral value used is pinned by the
link-adapted or support-control axioms.

Note on normalization: the spectral invariant is normalized by 1/k (the
number of link components).  The scl family combines the two invariants
with weights k_n and k_1 (equivalently, it uses the un-normalized sums
sum_i int s_i dt), which is what makes the family evaluate to exactly n on
the band Hamiltonian while its defect stays bounded by 4.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Sequence

from .hamiltonian import (
    Hamiltonian,
    HamiltonianError,
    PLHamiltonian,
    PiecewiseLinearProfile,
    bar,
    integrate,
    integrate_exact,
)
from .rationals import parse_fraction
from .spectral import bound
from .surface_link import (
    LinkError,
    SurfaceLink,
    build_parallel_link,
    infer_eta,
    lambda_closed_form,
)

__all__ = [
    "DefectBound",
    "defect_bound",
    "QuasiValue",
    "homogenize",
    "DualityReport",
    "duality_check",
    "SclRow",
    "SclTable",
    "scl_lower_bound",
    "band_hamiltonian",
    "WitnessResult",
    "independence_witness",
    "QuasicalabiRow",
    "QuasicalabiTable",
    "quasicalabi_check",
    "fragmentation_links",
    "fragmentation_difference",
]


@dataclass(frozen=True)
class DefectBound:
    k: int
    eta: Fraction
    lam: Fraction
    defect: Fraction  # 2 (k+1) lambda / k


def defect_bound(k: int, eta) -> DefectBound:
    eta = parse_fraction(eta)
    lam = lambda_closed_form(k, eta)
    return DefectBound(k=k, eta=eta, lam=lam, defect=2 * Fraction(k + 1, k) * lam)


def c_mu_gap(k: int, eta) -> Fraction:
    """(k+1) lambda / k, the bound on |c_L(H) - mu_L(phi_H^1)|."""
    return Fraction(k + 1, k) * lambda_closed_form(k, eta)


# ---------------------------------------------------------------------------
# homogenization


@dataclass(frozen=True)
class QuasiValue:
    lower: float
    upper: float
    n_used: int
    error_bound: float          # (k+1) lambda / (k n), <= defect / n
    c_lower: float              # the underlying bound on c(nH)/n
    c_upper: float
    exact_lower: Optional[Fraction] = None
    exact_upper: Optional[Fraction] = None

    @property
    def value(self) -> float:
        return 0.5 * (self.c_lower + self.c_upper)

    @property
    def radius(self) -> float:
        return 0.5 * (self.upper - self.lower)


def _require_mean_normalized(H: Hamiltonian, tol: float = 1e-9) -> None:
    exact = integrate_exact(H)
    if exact is not None:
        if exact != 0:
            raise HamiltonianError(f"H is not mean-normalized: integral {exact}")
        return
    if not H.autonomous:
        raise HamiltonianError("homogenization requires an autonomous Hamiltonian")
    mean = H.space_integral(0.0) / H.total_area()
    if abs(mean) > tol:
        raise HamiltonianError(f"H is not mean-normalized: mean {mean:.3e}")


def homogenize(H: Hamiltonian, link: SurfaceLink, n: int, eta=None) -> QuasiValue:
    """Certified interval for mu_L(phi_H^1) from c(H^{#n})/n = c(nH)/n.

    For link-adapted H this is exact and n-independent; in general the
    interval is the c-bound fattened by (k+1) lambda / (k n).
    """
    if n < 1:
        raise ValueError("n must be a positive integer")
    if not H.autonomous:
        raise HamiltonianError("homogenization implemented for autonomous Hamiltonians")
    _require_mean_normalized(H)
    if eta is None:
        eta = infer_eta(link)
        if eta is None:
            raise LinkError("link is not monotone")
    b_n = bound(H.scaled(n), link, eta=eta)
    gap = c_mu_gap(link.k, eta) / n
    c_lo, c_hi = b_n.lower / n, b_n.upper / n
    exact_lo = exact_hi = None
    if b_n.exact:
        exact_lo = b_n.exact_lower / n - gap
        exact_hi = b_n.exact_upper / n + gap
        c_lo = float(b_n.exact_lower / n)
        c_hi = float(b_n.exact_upper / n)
    return QuasiValue(
        lower=float(exact_lo) if exact_lo is not None else c_lo - float(gap),
        upper=float(exact_hi) if exact_hi is not None else c_hi + float(gap),
        n_used=n,
        error_bound=float(gap),
        c_lower=c_lo,
        c_upper=c_hi,
        exact_lower=exact_lo,
        exact_upper=exact_hi,
    )


# ---------------------------------------------------------------------------
# duality


@dataclass(frozen=True)
class DualityReport:
    lhs_lower: float             # lower(H) + lower(H-bar)
    rhs: Fraction                # (k+1) lambda / k
    slack: float
    holds: bool


def duality_check(H: Hamiltonian, link: SurfaceLink, eta=None, tol: float = 1e-9) -> DualityReport:
    """Soundness direction of c(H) + c(H-bar) <= (k+1) lambda / k: the lower
    interval ends must respect the inequality."""
    if eta is None:
        eta = infer_eta(link)
        if eta is None:
            raise LinkError("link is not monotone")
    rhs = c_mu_gap(link.k, eta)
    b = bound(H, link, eta=eta)
    bb = bound(bar(H), link, eta=eta)
    lhs = b.lower + bb.lower
    return DualityReport(
        lhs_lower=lhs, rhs=rhs, slack=float(rhs) - lhs, holds=lhs <= float(rhs) + tol
    )


# ---------------------------------------------------------------------------
# the scl table


def band_hamiltonian(n: int) -> PLHamiltonian:
    """Mean-normalized two-lobe profile supported in the thin band
    [3/(8n), 3/(4n)], equal to n exactly at the level 1/(2n).

    (The sphere-coordinate band -1 <= z <= -1 + 1.5/n becomes
    0 <= z <= 3/(4n) under z |-> (z+1)/2.)
    """
    if n < 2:
        raise ValueError("the band family starts at n = 2")
    a = Fraction(1, 2 * n)
    nodes = (
        (Fraction(0), Fraction(0)),
        (Fraction(3, 8 * n), Fraction(0)),
        (a, Fraction(n)),
        (Fraction(5, 8 * n), Fraction(0)),
        (Fraction(11, 16 * n), Fraction(-2 * n)),
        (Fraction(3, 4 * n), Fraction(0)),
        (Fraction(1), Fraction(0)),
    )
    H = PLHamiltonian(PiecewiseLinearProfile(nodes))
    assert H.profile.integral() == 0
    return H


@dataclass(frozen=True)
class SclRow:
    n: int
    k_n: int
    c_big: Fraction              # c_{L_n}(H_n) = n / (2n-1)
    c_base: Fraction             # c_{L_1}(H_n) = 0
    f_value: Fraction            # k_n c_big - k_1 c_base = n, exactly
    defect_sum: Fraction         # k_n D(mu_{L_n}) + k_1 D(mu_{L_1}) = 4
    scl_lower: Fraction          # f_value / defect_sum


@dataclass
class SclTable:
    rows: list[SclRow]
    notes: str = ""

    def columns(self):
        return ["n", "k_n", "c_big", "c_base", "f_value", "defect_sum", "scl_lower"]

    def as_rows(self):
        return [[r.n, r.k_n, r.c_big, r.c_base, r.f_value, r.defect_sum, r.scl_lower] for r in self.rows]


def scl_lower_bound(n_max: int, n_min: int = 2) -> SclTable:
    """Divergent scl lower bounds from the band family.

    For each n, H_n is the band Hamiltonian above, L_1 the equator and L_n
    the 2n-1 equally spaced horizontal circles.  Lagrangian control pins
    c_{L_n}(H_n) = n/(2n-1) (the band meets only the bottom circle, where
    H_n = n) and support control pins c_{L_1}(H_n) = 0.  The combination
    f_n = k_n mu_{L_n} - k_1 mu_{L_1} then takes the value n exactly, with
    defect at most k_n D_n + k_1 D_1 = 4, so scl(phi_{H_n}^1) >= n/4.
    """
    base = build_parallel_link(1, 0)
    rows = []
    for n in range(n_min, n_max + 1):
        k_n = 2 * n - 1
        link_n = build_parallel_link(k_n, 0)
        H = band_hamiltonian(n)

        b_big = bound(H, link_n)
        if not b_big.exact or b_big.exact_lower != b_big.exact_upper:
            raise AssertionError("band Hamiltonian must be link-adapted on L_n")
        c_big = b_big.exact_lower

        b_base = bound(H, base)
        if not b_base.exact or b_base.exact_lower != b_base.exact_upper:
            raise AssertionError("band Hamiltonian must be supported off the equator")
        c_base = b_base.exact_lower

        f_value = k_n * c_big - 1 * c_base
        defect_sum = k_n * defect_bound(k_n, 0).defect + 1 * defect_bound(1, 0).defect
        rows.append(
            SclRow(
                n=n,
                k_n=k_n,
                c_big=c_big,
                c_base=c_base,
                f_value=f_value,
                defect_sum=defect_sum,
                scl_lower=f_value / defect_sum,
            )
        )
    return SclTable(
        rows=rows,
        notes="f_n = k_n mu_{L_n} - mu_{L_1} evaluates to n by Lagrangian control; "
        "scl >= |f_n| / D(f_n) with D(f_n) <= sum of weighted defects",
    )


# ---------------------------------------------------------------------------
# independence witnesses


@dataclass(frozen=True)
class WitnessResult:
    pairs: tuple[tuple[int, Fraction], ...]   # in processed order
    order: tuple[int, ...]                    # indices into the input list
    levels: tuple[Fraction, ...]              # distinguishing circle levels
    matrix: tuple[tuple[Fraction, ...], ...]

    @property
    def is_unit_triangular(self) -> bool:
        n = len(self.matrix)
        for i in range(n):
            if self.matrix[i][i] != 1:
                return False
            for j in range(i + 1, n):
                if self.matrix[i][j] != 0:
                    return False
        return True


def _witness_profile(z_star: Fraction, peak: Fraction, delta: Fraction) -> PLHamiltonian:
    """Two-lobe bump: +peak exactly at z_star, compensating lobe inside the
    band (z_star - delta/4, z_star + delta); zero total integral."""
    nodes = (
        (Fraction(0), Fraction(0)),
        (z_star - delta / 4, Fraction(0)),
        (z_star, peak),
        (z_star + delta / 4, Fraction(0)),
        (z_star + delta / 2, Fraction(0)),
        (z_star + 3 * delta / 4, -peak),
        (z_star + delta, Fraction(0)),
        (Fraction(1), Fraction(0)),
    )
    nodes = tuple((z, v) for z, v in nodes)
    H = PLHamiltonian(PiecewiseLinearProfile(nodes))
    assert H.profile.integral() == 0
    return H


def independence_witness(pairs: Sequence[tuple[int, object]]) -> WitnessResult:
    """Evaluation matrix certifying linear independence of the family
    mu_{k,eta} over the given (k, eta) list.

    Each target gets a mean-normalized bump supported near the
    distinguishing circle of its parallel-circle link: the bottom circle
    (bounding a disc of area lambda) when the lambdas differ, the
    second-from-bottom circle within an equal-lambda block.  The bump takes
    the value k exactly on its circle, so Lagrangian control evaluates the
    target to 1, while support control kills every earlier invariant.

    Targets are processed by lambda descending, then eta ascending within
    an equal-lambda block: the bottom circle of a smaller-lambda link lies
    below every circle of the larger-lambda links, so each witness band can
    avoid all earlier links' circles, which pins the entries above the
    diagonal to zero.  (Entries below the diagonal may be nonzero; they do
    not affect the independence certificate.)  A family whose circles make
    this separation impossible is rejected.
    """
    pairs = [(int(k), parse_fraction(eta)) for k, eta in pairs]
    if len({p for p in pairs}) != len(pairs):
        raise LinkError("duplicate (k, eta) pairs give identical invariants")
    lambdas = [lambda_closed_form(k, eta) for k, eta in pairs]
    order = sorted(range(len(pairs)), key=lambda i: (-lambdas[i], pairs[i][1]))
    pairs = [pairs[i] for i in order]
    lambdas = [lambdas[i] for i in order]
    links = [build_parallel_link(k, eta) for k, eta in pairs]

    levels: list[Fraction] = []
    for (k, eta), lam in zip(pairs, lambdas):
        if lambdas.count(lam) == 1:
            levels.append(lam)  # bottom circle bounds a disc of area lambda
        else:
            if k < 2:
                raise LinkError(
                    "two one-component links share the equator; not separable"
                )
            levels.append(2 * lam - 2 * eta)  # second-from-bottom circle

    hams = []
    for j, (z_star, (k, _eta)) in enumerate(zip(levels, pairs)):
        forbidden = {c.level for link in links[:j] for c in link.circles}
        forbidden |= {c.level for c in links[j].circles if c.level != z_star}
        gaps = [abs(z - z_star) for z in forbidden]
        gaps += [z_star, 1 - z_star]
        delta = min(gaps) / 3
        if delta <= 0:
            raise LinkError(
                f"distinguishing circle of target {pairs[j]} coincides with "
                "another circle; not separable"
            )
        hams.append(_witness_profile(z_star, Fraction(k), delta))

    matrix = []
    for link in links:
        row = []
        for H in hams:
            b = bound(H, link)
            if not b.exact or b.exact_lower != b.exact_upper:
                raise AssertionError("witness evaluation did not collapse to a point")
            # mu = c for link-adapted autonomous H; = -Cal = 0 off support
            row.append(b.exact_lower)
        matrix.append(tuple(row))
    result = WitnessResult(
        pairs=tuple(pairs), order=tuple(order), levels=tuple(levels), matrix=tuple(matrix)
    )
    if not result.is_unit_triangular:
        raise LinkError("witness matrix is not unit triangular; family not separable")
    return result


# ---------------------------------------------------------------------------
# the quasi-Calabi table


@dataclass(frozen=True)
class QuasicalabiRow:
    k: int
    eta: Fraction
    lam: Fraction
    d_k: Fraction                # (k+1) lambda / k
    c_lower: float
    c_upper: float
    mu_lower: float
    mu_upper: float
    radius: float                # d_k + half the c-bound width


@dataclass
class QuasicalabiTable:
    rows: list[QuasicalabiRow]
    notes: str = ""

    def columns(self):
        return ["k", "eta", "lambda", "D_k", "c_lower", "c_upper", "mu_lo", "mu_hi", "radius"]

    def as_rows(self):
        return [
            [r.k, r.eta, r.lam, r.d_k, r.c_lower, r.c_upper, r.mu_lower, r.mu_upper, r.radius]
            for r in self.rows
        ]


def quasicalabi_check(
    H: Hamiltonian,
    ks: Sequence[int],
    eta_rule: Optional[Callable[[int], object]] = None,
) -> QuasicalabiTable:
    """Per k: certified c-bound on the k-circle parallel link and the derived
    mu-interval |c - mu| <= D_k = (k+1) lambda_k / k; for mean-normalized H
    both shrink toward zero."""
    _require_mean_normalized(H)
    rows = []
    for k in ks:
        if k < 2:
            raise LinkError("quasicalabi table needs k >= 2")
        eta = parse_fraction(eta_rule(k)) if eta_rule is not None else Fraction(0)
        if eta < 0 or (eta and eta >= Fraction(1, 2 * k * (k - 1))):
            raise LinkError(f"eta rule violates eta < 1/(2k(k-1)) at k={k}")
        link = build_parallel_link(k, eta)
        b = bound(H, link, eta=eta)
        d_k = c_mu_gap(k, eta)
        rows.append(
            QuasicalabiRow(
                k=k,
                eta=eta,
                lam=lambda_closed_form(k, eta),
                d_k=d_k,
                c_lower=b.lower,
                c_upper=b.upper,
                mu_lower=b.lower - float(d_k),
                mu_upper=b.upper + float(d_k),
                radius=float(d_k) + 0.5 * b.width,
            )
        )
    return QuasicalabiTable(rows=rows)


# ---------------------------------------------------------------------------
# fragmentation


def fragmentation_links(A) -> tuple[SurfaceLink, SurfaceLink]:
    """(L_2, L_1): a two-circle monotone link hugging the equator plus the
    equator itself, both disjoint from the southern disc {z <= A}, A < 1/2.

    The difference mu_{L_2} - mu_{L_1} vanishes on everything supported in
    that disc (support control on both links)."""
    A = parse_fraction(A)
    if not (0 < A < Fraction(1, 2)):
        raise LinkError("fragmentation witness needs 0 < A < 1/2")
    eta_min = max(Fraction(0), Fraction(3 * A - 1, 2))
    eta = (eta_min + Fraction(1, 4)) / 2
    link2 = build_parallel_link(2, eta)
    link1 = build_parallel_link(1, 0)
    assert min(c.level for c in link2.circles) > A
    return link2, link1


def fragmentation_difference(
    H: Hamiltonian, link2: SurfaceLink, link1: SurfaceLink
) -> float:
    """mu_{L_2}(phi_H) - mu_{L_1}(phi_H) for H supported off both links.

    Each term equals -Cal(phi_H) by support control, so the difference is
    exactly zero; both support checks are enforced.
    """
    for link in (link2, link1):
        b = bound(H, link)
        if "SupportControl" not in {s.axiom for s in b.derivation}:
            raise LinkError("H is not supported away from the witness links")
    cal2 = integrate_exact(H)
    cal = float(cal2) if cal2 is not None else integrate(H)
    return (-cal) - (-cal)
