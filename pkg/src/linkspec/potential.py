"""Disc potentials of links and their critical points.

The potential of a link with regions B_1..B_s is the Laurent polynomial

    W(x) = sum_j x^{e_j},      e_j = net signed incidence vector of dB_j,

one monomial per region, in one variable per circle.  With a formal area
variable T the j-th monomial is weighted by T^{A_j + 2(k_j-1)*eta}; the
plain potential is the specialization T = 1.  For a link in which every
circle separates two distinct regions, each variable occurs with exponent
+1 in exactly one monomial and -1 in exactly one other, which forces
(1,...,1) to be a critical point.

Critical points are sought over (C*)^k by damped Newton iteration from
randomized unit-torus starts, with a Farrell-style deflation pass against
the roots already found (the complex system is solved in its real/imaginary
splitting, where the shifted deflation operator is standard).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .rationals import format_fraction, parse_fraction
from .surface_link import SurfaceLink, require_valid, validate_link

__all__ = [
    "Monomial",
    "DiscPotential",
    "CriticalPoint",
    "CriticalPointSearch",
    "build_potential",
    "eval_grad_hess",
    "find_critical_points",
    "handleslide",
    "handleslide_point",
    "clifford_potential",
]

RESIDUAL_TOL = 1e-12
DEGENERACY_TOL = 1e-9
STARTS_PER_VARIABLE = 200


@dataclass(frozen=True)
class Monomial:
    coeff: complex
    exponents: tuple[int, ...]
    area_exponent: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "exponents", tuple(int(e) for e in self.exponents))
        object.__setattr__(self, "area_exponent", Fraction(self.area_exponent))


@dataclass(frozen=True)
class DiscPotential:
    variables: tuple[str, ...]
    monomials: tuple[Monomial, ...]
    warnings: tuple[str, ...] = ()

    @property
    def k(self) -> int:
        return len(self.variables)

    def exponent_matrix(self) -> np.ndarray:
        return np.array([m.exponents for m in self.monomials], dtype=np.int64)

    def gradient_at_ones(self) -> tuple[complex, ...]:
        """Exact gradient at (1,...,1): integer/complex sums of exponents."""
        grad = []
        for i in range(self.k):
            grad.append(sum(m.coeff * m.exponents[i] for m in self.monomials))
        return tuple(grad)

    def specialize(self) -> "DiscPotential":
        """Drop the formal area exponents (set T = 1)."""
        return DiscPotential(
            self.variables,
            tuple(Monomial(m.coeff, m.exponents) for m in self.monomials),
            self.warnings,
        )

    def to_dict(self) -> dict:
        return {
            "variables": list(self.variables),
            "monomials": [
                {
                    "coeff": [m.coeff.real, m.coeff.imag]
                    if isinstance(m.coeff, complex)
                    else [float(m.coeff), 0.0],
                    "exponents": list(m.exponents),
                    "area_exponent": format_fraction(m.area_exponent),
                }
                for m in self.monomials
            ],
            "warnings": list(self.warnings),
        }


@dataclass(frozen=True)
class CriticalPoint:
    coords: tuple[complex, ...]
    residual: float
    hessian_det: complex
    non_degenerate: bool


@dataclass(frozen=True)
class CriticalPointSearch:
    """List-like search result that also records per-start convergence."""

    points: tuple[CriticalPoint, ...]
    n_starts: int
    n_failed: int

    def __iter__(self):
        return iter(self.points)

    def __len__(self):
        return len(self.points)

    def __getitem__(self, idx):
        return self.points[idx]


def build_potential(link: SurfaceLink, eta=None) -> DiscPotential:
    """One unit monomial per region; exponents from the boundary incidences."""
    require_valid(link)
    report = validate_link(link)
    warnings = list(report.warnings)
    eta_frac = parse_fraction(eta) if eta is not None else None

    variables = tuple(c.id for c in link.circles)
    index = {cid: i for i, cid in enumerate(variables)}
    monomials = []
    for r in link.regions:
        exps = [0] * link.k
        for cid, sign in r.boundary:
            exps[index[cid]] += sign
        area_exp = (
            r.area + 2 * eta_frac * (r.boundary_count - 1)
            if eta_frac is not None
            else Fraction(0)
        )
        monomials.append(Monomial(1.0 + 0.0j, tuple(exps), area_exp))

    # a circle with net-zero incidence in a region drops out of that monomial
    for i, cid in enumerate(variables):
        touched = [m for m, r in zip(monomials, link.regions) if any(c == cid for c, _ in r.boundary)]
        if any(m.exponents[i] == 0 for m in touched):
            warnings.append(
                f"circle {cid!r} has net-zero incidence in a region; "
                "its variable drops from that monomial"
            )
    return DiscPotential(variables, tuple(monomials), tuple(warnings))


def clifford_potential(k: int) -> DiscPotential:
    """sum(x_i) + 1/(x_1...x_k), the k disjoint-disc potential."""
    monos = [Monomial(1.0, tuple(1 if j == i else 0 for j in range(k))) for i in range(k)]
    monos.append(Monomial(1.0, tuple(-1 for _ in range(k))))
    return DiscPotential(tuple(f"x{i + 1}" for i in range(k)), tuple(monos))


def eval_grad_hess(W: DiscPotential, x: Sequence[complex]):
    """Value, gradient and Hessian of W at x in (C*)^k, by exact
    differentiation of the monomial data (area exponents specialized to 1).

    With E the exponent matrix and t the monomial values, the derivatives
    are grad = (t E) / x and hess = (E' diag(t) E - diag(t E)) / (x x'),
    the usual Euler-operator identities for Laurent monomials.
    """
    x = np.asarray([complex(v) for v in x], dtype=complex)
    if len(x) != W.k:
        raise ValueError(f"expected {W.k} coordinates, got {len(x)}")
    if np.any(x == 0):
        raise ZeroDivisionError("potential evaluated at a zero coordinate")
    E = W.exponent_matrix()
    coeffs = np.asarray([m.coeff for m in W.monomials], dtype=complex)
    terms = coeffs * np.prod(x[None, :] ** E, axis=1)
    value = complex(terms.sum())
    tE = terms @ E
    grad = tE / x
    hess = (E.T @ (terms[:, None] * E) - np.diag(tE)) / np.outer(x, x)
    return value, grad, hess


def _real_system(W: DiscPotential):
    """Real/imaginary splitting of grad W = 0: residual-only and full
    (residual, Jacobian) evaluators."""
    k = W.k
    E = W.exponent_matrix()
    coeffs = np.asarray([m.coeff for m in W.monomials], dtype=complex)

    def _terms(x):
        return coeffs * np.prod(x[None, :] ** E, axis=1)

    def fun_res(v: np.ndarray) -> np.ndarray:
        x = v[:k] + 1j * v[k:]
        g = (_terms(x) @ E) / x
        return np.concatenate([g.real, g.imag])

    def fun_full(v: np.ndarray):
        x = v[:k] + 1j * v[k:]
        terms = _terms(x)
        tE = terms @ E
        g = tE / x
        h = (E.T @ (terms[:, None] * E) - np.diag(tE)) / np.outer(x, x)
        F = np.concatenate([g.real, g.imag])
        J = np.empty((2 * k, 2 * k))
        J[:k, :k] = h.real
        J[:k, k:] = -h.imag
        J[k:, :k] = h.imag
        J[k:, k:] = h.real
        return F, J

    return fun_res, fun_full


def _admissible(v: np.ndarray) -> bool:
    k = len(v) // 2
    x = v[:k] + 1j * v[k:]
    return bool(np.all(np.abs(x) > 1e-10) and np.all(np.abs(x) < 1e8))


def _newton(system, v0: np.ndarray, tol: float, max_iter: int = 100, deflate=None):
    """Damped Newton with a residual-decrease backtracking line search,
    keeping iterates away from the toric boundary.

    With a deflation operator the search runs on the deflated system; since
    the operator is bounded below by 1, deflated convergence implies true
    convergence, while known roots repel the iteration.
    """
    fun_res, fun_full = system

    def res_at(v) -> float:
        F = fun_res(v)
        if deflate is not None:
            F = deflate.residual(v, F)
        return float(np.linalg.norm(F))

    def full_at(v):
        F, J = fun_full(v)
        if deflate is not None:
            F, J = deflate.system(v, F, J)
        return F, J

    v = v0.copy()
    res = res_at(v)
    for _ in range(max_iter):
        if res < tol:
            return v, res
        F, J = full_at(v)
        try:
            step = np.linalg.solve(J, -F)
        except np.linalg.LinAlgError:
            return None
        if not np.all(np.isfinite(step)):
            return None
        scale = 1.0
        accepted = False
        for _ in range(16):
            cand = v + scale * step
            if _admissible(cand):
                res_new = res_at(cand)
                if np.isfinite(res_new) and res_new < res:
                    v, res = cand, res_new
                    accepted = True
                    break
            scale *= 0.5
        if not accepted:
            return None
    return (v, res) if res < tol else None


class _DeflationOperator:
    """Farrell shifted deflation M(v) = prod(1/|v-r|^p + shift)."""

    def __init__(self, roots: list[np.ndarray], power: float = 2.0, shift: float = 1.0):
        self.roots = roots
        self.power = power
        self.shift = shift

    def _factor(self, v):
        M = 1.0
        grad_logM = np.zeros_like(v)
        for r in self.roots:
            d = v - r
            nd2 = max(float(np.dot(d, d)), 1e-24)
            m_r = nd2 ** (-self.power / 2.0) + self.shift
            M *= m_r
            grad_logM += (-self.power * nd2 ** (-self.power / 2.0 - 1.0) / m_r) * d
        return M, grad_logM

    def residual(self, v, F):
        M, _ = self._factor(v)
        return M * F

    def system(self, v, F, J):
        M, grad_logM = self._factor(v)
        return M * F, M * J + np.outer(F, M * grad_logM)


def find_critical_points(
    W: DiscPotential,
    seed: int = 0,
    n_starts: Optional[int] = None,
    residual_tol: float = RESIDUAL_TOL,
    degeneracy_tol: float = DEGENERACY_TOL,
    max_iter: int = 100,
) -> CriticalPointSearch:
    """All critical points reachable by the multistart budget.

    (1,...,1) is seeded unconditionally.  Starts are uniform on the unit
    torus; converged points are deduplicated and classified by the modulus
    of their Hessian determinant.  A deflation pass against the found roots
    retries a portion of the starts.  Non-convergent starts are counted,
    not fatal.
    """
    k = W.k
    if n_starts is None:
        n_starts = STARTS_PER_VARIABLE * max(1, k)
    rng = np.random.default_rng(seed)
    system = _real_system(W)

    raw_roots: list[np.ndarray] = []
    failed = 0

    def try_start(v0, deflate=None, count_failure=True) -> None:
        nonlocal failed
        out = _newton(system, v0, residual_tol, max_iter=max_iter, deflate=deflate)
        if out is None:
            if count_failure:
                failed += 1
            return
        v, _ = out
        for r in raw_roots:
            if np.linalg.norm(v - r) <= 1e-7 * max(1.0, np.linalg.norm(r)):
                return
        raw_roots.append(v)

    ones = np.concatenate([np.ones(k), np.zeros(k)])
    try_start(ones)

    starts = []
    for _ in range(n_starts):
        phases = rng.uniform(0.0, 2.0 * np.pi, size=k)
        radii = np.exp(rng.uniform(-0.3, 0.3, size=k))
        x = radii * np.exp(1j * phases)
        starts.append(np.concatenate([x.real, x.imag]))
    for v0 in starts:
        try_start(v0)

    # deflation pass: known roots repel, so these starts either find a new
    # root or fail by design (not counted as non-convergence)
    n_deflation = min(len(starts), 50 * max(1, k))
    for v0 in starts[:n_deflation]:
        try_start(v0, deflate=_DeflationOperator(raw_roots[:]), count_failure=False)

    points = []
    for v in raw_roots:
        x = v[:k] + 1j * v[k:]
        _, g, h = eval_grad_hess(W, x)
        det = complex(np.linalg.det(h))
        points.append(
            CriticalPoint(
                coords=tuple(complex(c) for c in x),
                residual=float(np.linalg.norm(g)),
                hessian_det=det,
                non_degenerate=abs(det) > degeneracy_tol,
            )
        )
    points.sort(key=lambda p: tuple((round(c.real, 8), round(c.imag, 8)) for c in p.coords))
    return CriticalPointSearch(tuple(points), n_starts=n_starts + 1, n_failed=failed)


def handleslide(W: DiscPotential, i: int, j: int, epsilon: int) -> DiscPotential:
    """Re-express W in the coordinates x'_i = x_i * x_j^epsilon.

    Substituting x_i = x'_i * x'_j^(-epsilon) sends the exponent vector e to
    e' with e'_j = e_j - epsilon * e_i, a unimodular transformation of the
    monomial data.  Applying epsilon then -epsilon is the identity.
    """
    if i == j:
        raise ValueError("handleslide requires two distinct circle indices")
    if epsilon not in (1, -1):
        raise ValueError("epsilon must be +-1")
    if not (0 <= i < W.k and 0 <= j < W.k):
        raise IndexError("circle index out of range")
    monos = []
    for m in W.monomials:
        e = list(m.exponents)
        e[j] -= epsilon * e[i]
        monos.append(Monomial(m.coeff, tuple(e), m.area_exponent))
    return DiscPotential(W.variables, tuple(monos), W.warnings)


def handleslide_point(x: Sequence[complex], i: int, j: int, epsilon: int) -> tuple[complex, ...]:
    """Image of a point under the handleslide coordinate change."""
    x = [complex(v) for v in x]
    y = list(x)
    y[i] = x[i] * x[j] ** epsilon
    return tuple(y)
