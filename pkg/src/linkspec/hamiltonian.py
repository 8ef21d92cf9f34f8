"""Time-dependent Hamiltonians on coordinate models of the sphere and disc.

Two spatial models are supported:

* cylinder: S^2 as [0,1]_z x (R/Z)_theta with area form dz ^ dtheta
  (total area 1); z-profile Hamiltonians depend on (t, z) only, and their
  flows rotate each horizontal circle rigidly.
* disc: the radius-R disc with area form r dr dtheta (total area pi R^2);
  radial Hamiltonians depend on (t, r) only.

Autonomous profile Hamiltonians have level-preserving flows, so composition
H # H'(t,x) = H_t(x) + H'(t, (phi_H^t)^{-1}(x)) collapses to the pointwise
sum, and H^{#n} = n.H.  Piecewise-linear z-profiles with rational nodes form
an exact-arithmetic subclass: integrals, extrema, means and Hofer norms of
those are computed in Fraction arithmetic and only converted to float at the
boundary.

The infinite-twist machinery lives here too: a twist profile f (decreasing,
vanishing near R) generates the map (r, theta) |-> (r, theta + 2 pi t f(r));
its truncations f_i = min(f, c_i) have generating Hamiltonians

    F_i(r) = 2 pi * integral_r^R s f_i(s) ds,

an increasing family whose Calabi invariants 2 pi^2 * integral r^3 f_i(r) dr
diverge exactly when integral_0^R r^3 f(r) dr does.  (The r^3-integral is the
standard heuristic value of the twist's Calabi invariant; with our area and
angle conventions the honest Hamiltonian integral carries the constant
2 pi^2, which cancels from every divergence statement.)
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np

from .quadrature import adaptive_quad, fixed_time_grid
from .rationals import format_fraction, parse_fraction

__all__ = [
    "PiecewiseLinearProfile",
    "Hamiltonian",
    "PLHamiltonian",
    "CallableZProfile",
    "RadialHamiltonian",
    "CapHamiltonian",
    "GridHamiltonian",
    "ShiftedHamiltonian",
    "ScaledHamiltonian",
    "SumHamiltonian",
    "BarHamiltonian",
    "HamiltonianError",
    "ResolutionError",
    "integrate",
    "mean_normalize",
    "hofer_norm",
    "compose",
    "compose_iterate",
    "bar",
    "TwistProfile",
    "power_cutoff_profile",
    "parse_twist_expr",
    "twist_truncations",
    "twist_hamiltonian",
    "embed_in_cap",
    "ham_to_dict",
    "ham_from_dict",
]


class HamiltonianError(ValueError):
    pass


class ResolutionError(HamiltonianError):
    """Grid data too coarse for the requested quadrature tolerance."""


# ---------------------------------------------------------------------------
# exact piecewise-linear profiles


@dataclass(frozen=True)
class PiecewiseLinearProfile:
    """Piecewise-linear function on [0,1] with exact rational nodes."""

    nodes: tuple[tuple[Fraction, Fraction], ...]

    def __post_init__(self):
        nodes = tuple((Fraction(z), Fraction(v)) for z, v in self.nodes)
        if len(nodes) < 2:
            raise HamiltonianError("need at least two nodes")
        if nodes[0][0] != 0 or nodes[-1][0] != 1:
            raise HamiltonianError("profile nodes must span [0, 1]")
        for (z0, _), (z1, _) in zip(nodes, nodes[1:]):
            if z1 <= z0:
                raise HamiltonianError("node positions must be strictly increasing")
        object.__setattr__(self, "nodes", nodes)

    def value(self, z: Fraction) -> Fraction:
        z = Fraction(z)
        if z <= self.nodes[0][0]:
            return self.nodes[0][1]
        if z >= self.nodes[-1][0]:
            return self.nodes[-1][1]
        for (z0, v0), (z1, v1) in zip(self.nodes, self.nodes[1:]):
            if z0 <= z <= z1:
                return v0 + (v1 - v0) * (z - z0) / (z1 - z0)
        raise AssertionError("unreachable")

    def value_array(self, zs: np.ndarray) -> np.ndarray:
        xp = np.array([float(z) for z, _ in self.nodes])
        fp = np.array([float(v) for _, v in self.nodes])
        return np.interp(zs, xp, fp)

    def integral(self) -> Fraction:
        total = Fraction(0)
        for (z0, v0), (z1, v1) in zip(self.nodes, self.nodes[1:]):
            total += (z1 - z0) * (v0 + v1) / 2
        return total

    def min_max_on(self, lo: Fraction, hi: Fraction) -> tuple[Fraction, Fraction]:
        lo, hi = Fraction(lo), Fraction(hi)
        vals = [self.value(lo), self.value(hi)]
        vals += [v for z, v in self.nodes if lo < z < hi]
        return min(vals), max(vals)

    def min_max(self) -> tuple[Fraction, Fraction]:
        vals = [v for _, v in self.nodes]
        return min(vals), max(vals)

    def support(self) -> tuple[Fraction, Fraction]:
        """Smallest closed interval outside which the profile vanishes."""
        nz = [i for i, (_, v) in enumerate(self.nodes) if v != 0]
        if not nz:
            return (Fraction(0), Fraction(0))
        first, last = nz[0], nz[-1]
        lo = self.nodes[max(first - 1, 0)][0]
        hi = self.nodes[min(last + 1, len(self.nodes) - 1)][0]
        return (lo, hi)

    def _merge_zs(self, other: "PiecewiseLinearProfile") -> list[Fraction]:
        zs = sorted({z for z, _ in self.nodes} | {z for z, _ in other.nodes})
        return zs

    def __add__(self, other: "PiecewiseLinearProfile") -> "PiecewiseLinearProfile":
        zs = self._merge_zs(other)
        return PiecewiseLinearProfile(tuple((z, self.value(z) + other.value(z)) for z in zs))

    def scale(self, c) -> "PiecewiseLinearProfile":
        c = parse_fraction(c)
        return PiecewiseLinearProfile(tuple((z, c * v) for z, v in self.nodes))

    def shift(self, c) -> "PiecewiseLinearProfile":
        c = parse_fraction(c)
        return PiecewiseLinearProfile(tuple((z, v + c) for z, v in self.nodes))


# ---------------------------------------------------------------------------
# Hamiltonian kinds


class Hamiltonian:
    """Common interface: spatial evaluation plus model metadata.

    `model` is "cylinder" or "disc".  Subclasses override the exact_* hooks
    when Fraction arithmetic is available; the generic numeric versions
    sample the profile (513 points per interval, 4097 per full model).
    """

    model: str = "cylinder"
    autonomous: bool = True
    disc_radius: float = 0.0  # disc model only

    # -- evaluation ---------------------------------------------------------
    def value(self, t: float, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def total_area(self) -> float:
        if self.model == "cylinder":
            return 1.0
        return math.pi * self.disc_radius**2

    def _domain(self) -> tuple[float, float]:
        return (0.0, 1.0) if self.model == "cylinder" else (0.0, self.disc_radius)

    # -- spatial integrals --------------------------------------------------
    def space_integral(self, t: float) -> float:
        lo, hi = self._domain()
        if self.model == "cylinder":
            return adaptive_quad(lambda z: self.value(t, z), lo, hi)
        return 2.0 * math.pi * adaptive_quad(lambda r: self.value(t, r) * r, lo, hi)

    def exact_space_integral(self) -> Optional[Fraction]:
        return None

    # -- extrema ------------------------------------------------------------
    def interval_min_max(self, t: float, lo: float, hi: float, samples: int = 513):
        if lo == hi:
            v = float(np.asarray(self.value(t, np.array([lo])))[0])
            return v, v
        xs = np.linspace(lo, hi, samples)
        vals = np.asarray(self.value(t, xs), dtype=float)
        return float(vals.min()), float(vals.max())

    def exact_interval_min_max(self, lo: Fraction, hi: Fraction):
        return None

    def space_min_max(self, t: float):
        lo, hi = self._domain()
        return self.interval_min_max(t, lo, hi, samples=4097)

    def exact_space_min_max(self):
        return None

    # -- structure ----------------------------------------------------------
    def support(self):
        """Declared spatial support interval, or None if unknown."""
        return None

    @property
    def exact(self) -> bool:
        return False

    # -- algebra --------------------------------------------------------------
    def shifted(self, s) -> "Hamiltonian":
        return ShiftedHamiltonian(self, s)

    def scaled(self, c) -> "Hamiltonian":
        return ScaledHamiltonian(self, c)

    def __add__(self, other: "Hamiltonian") -> "Hamiltonian":
        return SumHamiltonian(self, other)

    def __sub__(self, other: "Hamiltonian") -> "Hamiltonian":
        return self + other.scaled(-1)

    def __neg__(self) -> "Hamiltonian":
        return self.scaled(-1)


class PLHamiltonian(Hamiltonian):
    """Autonomous exact piecewise-linear z-profile on the cylinder model."""

    model = "cylinder"
    autonomous = True

    def __init__(self, profile: PiecewiseLinearProfile):
        self.profile = profile

    def value(self, t, x):
        return self.profile.value_array(np.asarray(x, dtype=float))

    def space_integral(self, t: float) -> float:
        return float(self.profile.integral())

    def exact_space_integral(self) -> Fraction:
        return self.profile.integral()

    def interval_min_max(self, t, lo, hi, samples: int = 0):
        mn, mx = self.profile.min_max_on(Fraction(lo) if not isinstance(lo, Fraction) else lo,
                                         Fraction(hi) if not isinstance(hi, Fraction) else hi)
        return float(mn), float(mx)

    def exact_interval_min_max(self, lo, hi):
        return self.profile.min_max_on(lo, hi)

    def space_min_max(self, t: float):
        mn, mx = self.profile.min_max()
        return float(mn), float(mx)

    def exact_space_min_max(self):
        return self.profile.min_max()

    def support(self):
        return self.profile.support()

    @property
    def exact(self) -> bool:
        return True

    def shifted(self, s):
        try:
            return PLHamiltonian(self.profile.shift(parse_fraction(s)))
        except (TypeError, ValueError):
            return ShiftedHamiltonian(self, s)

    def scaled(self, c):
        try:
            return PLHamiltonian(self.profile.scale(parse_fraction(c)))
        except (TypeError, ValueError):
            return ScaledHamiltonian(self, c)

    def __add__(self, other):
        if isinstance(other, PLHamiltonian):
            return PLHamiltonian(self.profile + other.profile)
        return SumHamiltonian(self, other)


class CallableZProfile(Hamiltonian):
    """z-profile from a vectorized callable f(t, z)."""

    model = "cylinder"

    def __init__(self, func: Callable, autonomous: bool = True, support=None, label: str = ""):
        self.func = func
        self.autonomous = autonomous
        self._support = support
        self.label = label

    def value(self, t, x):
        return np.asarray(self.func(t, np.asarray(x, dtype=float)), dtype=float)

    def support(self):
        return self._support


class RadialHamiltonian(Hamiltonian):
    """Radial profile on the radius-R disc."""

    model = "disc"

    def __init__(self, func: Callable, R: float, autonomous: bool = True, support=None, label: str = ""):
        self.func = func
        self.disc_radius = float(R)
        self.autonomous = autonomous
        self._support = support
        self.label = label

    def value(self, t, x):
        return np.asarray(self.func(t, np.asarray(x, dtype=float)), dtype=float)

    def support(self):
        return self._support


class CapHamiltonian(Hamiltonian):
    """A radial disc Hamiltonian transplanted to a southern cap of the sphere.

    The cap {z <= pi R^2} of the cylinder model is identified with the
    radius-R disc by matching sub-areas: height z corresponds to radius
    r(z) = sqrt(z / pi).  The result is a z-profile.
    """

    model = "cylinder"

    def __init__(self, radial: RadialHamiltonian):
        if radial.model != "disc":
            raise HamiltonianError("can only embed disc-model Hamiltonians")
        self.radial = radial
        self.autonomous = radial.autonomous
        self.cap_height = math.pi * radial.disc_radius**2
        if self.cap_height > 1.0:
            raise HamiltonianError(
                f"disc of radius {radial.disc_radius} has area {self.cap_height:.3f} > 1, "
                "does not fit in the unit-area sphere"
            )

    def value(self, t, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        inside = x < self.cap_height
        if np.any(inside):
            r = np.sqrt(np.clip(x[inside], 0.0, None) / math.pi)
            out[inside] = self.radial.value(t, r)
        return out

    def space_integral(self, t: float) -> float:
        # areas match under the identification, so the integrals agree
        return self.radial.space_integral(t)

    def support(self):
        rs = self.radial.support()
        if rs is None:
            return (0.0, self.cap_height)
        return (0.0, math.pi * float(rs[1]) ** 2)


class GridHamiltonian(Hamiltonian):
    """Sampled values on a (t ,) z x theta lattice of the cylinder model."""

    model = "cylinder"

    def __init__(self, values, autonomous: Optional[bool] = None):
        arr = np.asarray(values, dtype=float)
        if arr.ndim == 2:
            arr = arr[None, :, :]
            autonomous = True if autonomous is None else autonomous
        if arr.ndim != 3:
            raise HamiltonianError("grid values must be [nz][ntheta] or [nt][nz][ntheta]")
        self.values = arr
        self.autonomous = bool(autonomous) if autonomous is not None else arr.shape[0] == 1
        self.nt, self.nz, self.ntheta = arr.shape
        if self.nz < 2 or self.ntheta < 2:
            raise HamiltonianError("grid must have at least 2 samples per axis")

    def _slice(self, t: float) -> np.ndarray:
        if self.nt == 1:
            return self.values[0]
        pos = np.clip(t, 0.0, 1.0) * (self.nt - 1)
        i = int(math.floor(pos))
        i = min(i, self.nt - 2)
        w = pos - i
        return (1 - w) * self.values[i] + w * self.values[i + 1]

    def _row(self, t: float, z: float) -> np.ndarray:
        sl = self._slice(t)
        pos = np.clip(z, 0.0, 1.0) * (self.nz - 1)
        i = min(int(math.floor(pos)), self.nz - 2)
        w = pos - i
        return (1 - w) * sl[i] + w * sl[i + 1]

    def value(self, t, x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        # theta-mean at each z level (used by profile-style consumers)
        return np.array([float(self._row(t, z).mean()) for z in x])

    def _integral_at_stride(self, stride: int) -> float:
        vals = self.values[:, ::stride, ::stride]
        per_t = [float(np.trapezoid(sl.mean(axis=1), dx=1.0 / (sl.shape[0] - 1))) for sl in vals]
        if len(per_t) == 1:
            return per_t[0]
        return float(np.trapezoid(per_t, dx=1.0 / (len(per_t) - 1)))

    def space_integral(self, t: float) -> float:
        sl = self._slice(t)
        return float(np.trapezoid(sl.mean(axis=1), dx=1.0 / (self.nz - 1)))

    def check_resolution(self, rel_tol: float = 1e-6) -> None:
        if self.nz < 5 or self.ntheta < 5:
            raise ResolutionError("grid too coarse to estimate quadrature error")
        full = self._integral_at_stride(1)
        half = self._integral_at_stride(2)
        if abs(full - half) > max(rel_tol * max(abs(full), 1.0), 1e-12) * 10:
            raise ResolutionError(
                f"grid resolution insufficient: refinement changes integral by {abs(full - half):.3e}"
            )

    def interval_min_max(self, t, lo, hi, samples: int = 0):
        # scan lattice rows across the z-band; theta resolved at 1024 samples
        theta_idx = np.linspace(0, self.ntheta - 1, 1024)
        zs = np.linspace(lo, hi, max(2, int((hi - lo) * self.nz) + 2)) if hi > lo else [lo]
        mn, mx = math.inf, -math.inf
        for z in zs:
            row = self._row(t, z)
            vals = np.interp(theta_idx, np.arange(self.ntheta), row)
            mn = min(mn, float(vals.min()))
            mx = max(mx, float(vals.max()))
        return mn, mx

    def space_min_max(self, t):
        sl = self._slice(t)
        return float(sl.min()), float(sl.max())


class ShiftedHamiltonian(Hamiltonian):
    """H + s(t) for a purely time-dependent shift s."""

    def __init__(self, base: Hamiltonian, shift):
        self.base = base
        self.model = base.model
        self.disc_radius = base.disc_radius
        if callable(shift):
            self.shift_fn = shift
            self.shift_const = None
            self.autonomous = False
        else:
            self.shift_const = float(shift)
            self.shift_fn = None
            self.autonomous = base.autonomous
        self._shift_exact = None
        if not callable(shift):
            try:
                self._shift_exact = parse_fraction(shift)
            except (TypeError, ValueError):
                self._shift_exact = None

    def shift_at(self, t: float) -> float:
        return self.shift_const if self.shift_fn is None else float(self.shift_fn(t))

    def shift_integral(self) -> float:
        if self.shift_fn is None:
            return self.shift_const
        nodes, weights = fixed_time_grid()
        return float(sum(w * self.shift_fn(t) for t, w in zip(nodes, weights)))

    def value(self, t, x):
        return self.base.value(t, x) + self.shift_at(t)

    def space_integral(self, t: float) -> float:
        return self.base.space_integral(t) + self.shift_at(t) * self.total_area()

    def interval_min_max(self, t, lo, hi, samples: int = 513):
        mn, mx = self.base.interval_min_max(t, lo, hi, samples)
        s = self.shift_at(t)
        return mn + s, mx + s

    def space_min_max(self, t):
        mn, mx = self.base.space_min_max(t)
        s = self.shift_at(t)
        return mn + s, mx + s

    def shifted(self, s):
        if self.shift_fn is None and not callable(s):
            return ShiftedHamiltonian(self.base, self.shift_const + float(s))
        return ShiftedHamiltonian(self, s)


class ScaledHamiltonian(Hamiltonian):
    def __init__(self, base: Hamiltonian, factor):
        self.base = base
        self.factor = float(factor)
        self.model = base.model
        self.disc_radius = base.disc_radius
        self.autonomous = base.autonomous

    def value(self, t, x):
        return self.factor * self.base.value(t, x)

    def space_integral(self, t):
        return self.factor * self.base.space_integral(t)

    def interval_min_max(self, t, lo, hi, samples: int = 513):
        mn, mx = self.base.interval_min_max(t, lo, hi, samples)
        if self.factor >= 0:
            return self.factor * mn, self.factor * mx
        return self.factor * mx, self.factor * mn

    def space_min_max(self, t):
        mn, mx = self.base.space_min_max(t)
        if self.factor >= 0:
            return self.factor * mn, self.factor * mx
        return self.factor * mx, self.factor * mn

    def support(self):
        return self.base.support()

    def scaled(self, c):
        return ScaledHamiltonian(self.base, self.factor * float(c))


class SumHamiltonian(Hamiltonian):
    def __init__(self, a: Hamiltonian, b: Hamiltonian):
        if a.model != b.model:
            raise HamiltonianError("cannot add Hamiltonians on different models")
        if a.model == "disc" and a.disc_radius != b.disc_radius:
            raise HamiltonianError("cannot add disc Hamiltonians of different radii")
        self.a, self.b = a, b
        self.model = a.model
        self.disc_radius = a.disc_radius
        self.autonomous = a.autonomous and b.autonomous

    def value(self, t, x):
        return self.a.value(t, x) + self.b.value(t, x)

    def space_integral(self, t):
        return self.a.space_integral(t) + self.b.space_integral(t)

    def support(self):
        sa, sb = self.a.support(), self.b.support()
        if sa is None or sb is None:
            return None
        return (min(sa[0], sb[0]), max(sa[1], sb[1]))


class BarHamiltonian(Hamiltonian):
    """H-bar(t, x) = -H(1-t, x)."""

    def __init__(self, base: Hamiltonian):
        self.base = base
        self.model = base.model
        self.disc_radius = base.disc_radius
        self.autonomous = base.autonomous

    def value(self, t, x):
        return -self.base.value(1.0 - t, x)

    def space_integral(self, t):
        return -self.base.space_integral(1.0 - t)

    def interval_min_max(self, t, lo, hi, samples: int = 513):
        mn, mx = self.base.interval_min_max(1.0 - t, lo, hi, samples)
        return -mx, -mn

    def space_min_max(self, t):
        mn, mx = self.base.space_min_max(1.0 - t)
        return -mx, -mn

    def support(self):
        return self.base.support()


# ---------------------------------------------------------------------------
# operations


def integrate(H: Hamiltonian, rel_tol: float = 1e-9) -> float:
    """The Calabi-type integral of H over time and the surface."""
    if isinstance(H, GridHamiltonian):
        H.check_resolution()
        return H._integral_at_stride(1)
    if H.autonomous:
        return H.space_integral(0.0)
    return adaptive_quad(
        np.vectorize(lambda t: H.space_integral(float(t))), 0.0, 1.0, rel_tol
    )


def integrate_exact(H: Hamiltonian) -> Optional[Fraction]:
    if H.autonomous:
        return H.exact_space_integral()
    return None


def mean_normalize(H: Hamiltonian) -> Hamiltonian:
    """Subtract the time-wise spatial mean; exact for rational PL profiles."""
    area = H.total_area()
    if isinstance(H, PLHamiltonian):
        return PLHamiltonian(H.profile.shift(-H.profile.integral()))
    if H.autonomous:
        mean = H.space_integral(0.0) / area
        if mean == 0.0:
            return H
        return H.shifted(-mean)
    cache: dict[float, float] = {}

    def s(t: float) -> float:
        if t not in cache:
            cache[t] = -H.space_integral(t) / area
        return cache[t]

    return ShiftedHamiltonian(H, s)


def hofer_norm(H: Hamiltonian) -> float:
    """Integral over time of the spatial oscillation max H_t - min H_t."""
    if H.autonomous:
        mn, mx = H.space_min_max(0.0)
        return mx - mn
    nodes, weights = fixed_time_grid()
    total = 0.0
    for t, w in zip(nodes, weights):
        mn, mx = H.space_min_max(float(t))
        total += w * (mx - mn)
    return float(total)


def _has_flow(H: Hamiltonian) -> bool:
    if isinstance(H, (GridHamiltonian,)):
        return False
    if isinstance(H, (ShiftedHamiltonian, ScaledHamiltonian, BarHamiltonian)):
        return _has_flow(H.base)
    if isinstance(H, SumHamiltonian):
        return _has_flow(H.a) and _has_flow(H.b)
    return H.autonomous


def compose(H: Hamiltonian, Hp: Hamiltonian) -> Hamiltonian:
    """H # H'.  Requires the flow of H, available for autonomous profile
    kinds, whose flows preserve the level circles; H' then pulls back to
    itself and the composition is the pointwise sum."""
    if not _has_flow(H):
        raise HamiltonianError(
            "composition requires the flow of the first factor; "
            "only autonomous profile Hamiltonians are supported"
        )
    if isinstance(Hp, GridHamiltonian):
        raise HamiltonianError("cannot pull a grid Hamiltonian back along the flow")
    return H + Hp


def compose_iterate(H: Hamiltonian, n: int) -> Hamiltonian:
    """H^{#n} = n.H for autonomous profile Hamiltonians."""
    if not _has_flow(H):
        raise HamiltonianError("iterated composition needs an autonomous profile")
    return H.scaled(n)


def bar(H: Hamiltonian) -> Hamiltonian:
    if H.autonomous:
        return H.scaled(-1)
    if isinstance(H, BarHamiltonian):
        return H.base
    return BarHamiltonian(H)


# ---------------------------------------------------------------------------
# twists


@dataclass
class TwistProfile:
    """Monotone decreasing angular-speed profile f on (0, R], vanishing near R.

    `divergent` asserts integral_0^R r^3 f(r) dr = +infinity (the infinite-
    Calabi condition).  When None it is estimated numerically from the decay
    of the truncated integrals; builders with known power-law behaviour set
    it analytically.
    """

    f: Callable[[np.ndarray], np.ndarray]
    R: float
    divergent: Optional[bool] = None
    breakpoints: tuple[float, ...] = ()
    label: str = ""

    def validate(self) -> None:
        """Sample-check monotonicity and the vanishing tail near R."""
        rs = np.linspace(self.R * 1e-4, self.R, 256)
        vals = self.f(rs)
        scale = max(1.0, float(np.max(np.abs(vals[np.isfinite(vals)]))))
        if np.any(np.diff(vals) > 1e-9 * scale):
            raise HamiltonianError("twist profile must be non-increasing")
        mid = max(1.0, abs(float(self.f(np.array([self.R / 2]))[0])))
        tail = self.f(np.linspace(self.R * 0.995, self.R, 16))
        if np.any(np.abs(tail) > 1e-9 * mid):
            raise HamiltonianError("twist profile must vanish near the disc boundary")

    def cubic_tail(self, eps: float) -> float:
        return adaptive_quad(
            lambda r: r**3 * self.f(r), eps, self.R, breakpoints=self.breakpoints
        )

    def is_divergent(self) -> bool:
        if self.divergent is not None:
            return self.divergent
        # the tail integral over [10^-k-1, 10^-k] must not decay to zero
        increments = []
        prev = self.cubic_tail(1e-1)
        for k in range(2, 8):
            cur = self.cubic_tail(10.0**-k)
            increments.append(cur - prev)
            prev = cur
        tail = increments[-1]
        return tail > 1e-6 and tail > 0.25 * increments[-2]


def _smoothstep_down(u: np.ndarray) -> np.ndarray:
    """C^1 cutoff: 1 for u<=0, 0 for u>=1."""
    u = np.clip(u, 0.0, 1.0)
    return 1.0 - u * u * (3.0 - 2.0 * u)


def power_cutoff_profile(p: float, R: float = 1.0, cut_start: float = 0.6, cut_end: float = 0.9) -> TwistProfile:
    """f(r) = r^-p smoothly cut off on [cut_start*R, cut_end*R]."""
    if not (0 < cut_start < cut_end <= 1.0):
        raise HamiltonianError("need 0 < cut_start < cut_end <= 1")
    a, b = cut_start * R, cut_end * R

    def f(r):
        r = np.asarray(r, dtype=float)
        with np.errstate(divide="ignore"):
            base = np.where(r > 0, r ** (-p), np.inf)
        return base * _smoothstep_down((r - a) / (b - a))

    return TwistProfile(
        f=f, R=R, divergent=(p >= 4.0), breakpoints=(a, b), label=f"r^-{p:g}"
    )


def parse_twist_expr(expr: str, R: float = 1.0) -> TwistProfile:
    """Parse "r^-4" style profiles."""
    text = expr.strip().replace(" ", "")
    if text.startswith("r^"):
        p = -float(text[2:])
        if p <= 0:
            raise HamiltonianError(f"twist profile must blow up at 0, got exponent {-p}")
        return power_cutoff_profile(p, R=R)
    raise HamiltonianError(f"unrecognized twist profile {expr!r} (expected e.g. 'r^-4')")


def twist_hamiltonian(profile: TwistProfile, level: float) -> RadialHamiltonian:
    """Generating Hamiltonian of the truncated twist f_c = min(f, c).

    F(r) = 2 pi * integral_r^R s f_c(s) ds; the flow under r dr d theta is
    (r, theta) |-> (r, theta + 2 pi t f_c(r)).
    """
    R = profile.R
    fc_breaks = set(profile.breakpoints)
    # radius where the truncation kicks in (f decreasing)
    lo, hi = 1e-12, R
    if profile.f(np.array([R * 0.999]))[0] < level:
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if profile.f(np.array([mid]))[0] > level:
                lo = mid
            else:
                hi = mid
        fc_breaks.add(0.5 * (lo + hi))

    def f_trunc(r):
        return np.minimum(profile.f(r), level)

    cache: dict[float, float] = {}

    def F_scalar(r: float) -> float:
        if r not in cache:
            if r >= R:
                cache[r] = 0.0
            else:
                cache[r] = 2.0 * math.pi * adaptive_quad(
                    lambda s: s * f_trunc(s), r, R,
                    breakpoints=[b for b in fc_breaks if r < b < R],
                )
        return cache[r]

    def F(t, r):
        r = np.atleast_1d(np.asarray(r, dtype=float))
        return np.array([F_scalar(float(ri)) for ri in r])

    supp_hi = max(profile.breakpoints) if profile.breakpoints else R
    ham = RadialHamiltonian(F, R=R, autonomous=True, support=(0.0, supp_hi),
                            label=f"twist[{profile.label}]@{level:g}")
    ham.truncation_level = level
    ham.twist_profile = profile
    return ham


def twist_calabi(profile: TwistProfile, level: float) -> float:
    """Calabi integral of the truncated twist: 2 pi^2 * integral r^3 f_c."""

    def f_trunc(r):
        return np.minimum(profile.f(r), level)

    rt = (1.0 / level) ** 0.25 if level > 0 else profile.R
    breaks = sorted(set(list(profile.breakpoints) + [rt]))
    val = adaptive_quad(lambda r: r**3 * f_trunc(r), 0.0, profile.R,
                       breakpoints=[b for b in breaks if 0 < b < profile.R])
    return 2.0 * math.pi**2 * val


def twist_truncations(
    profile: TwistProfile, count: int, levels: Optional[Sequence[float]] = None
) -> list[RadialHamiltonian]:
    """Increasing truncation family F_1 <= F_2 <= ... with divergent Calabi.

    Default truncation levels are geometric, c_i = 4^i, so the Calabi
    integrals grow linearly in i (roughly (pi^2 ln 4 / 2) per step for an
    r^-4 profile).
    """
    profile.validate()
    if not profile.is_divergent():
        raise HamiltonianError(
            "twist profile is not divergent: integral of r^3 f(r) converges"
        )
    if levels is None:
        levels = [4.0**i for i in range(1, count + 1)]
    if len(levels) != count or any(b <= a for a, b in zip(levels, levels[1:])):
        raise HamiltonianError("truncation levels must be strictly increasing")
    return [twist_hamiltonian(profile, c) for c in levels]


def embed_in_cap(radial: RadialHamiltonian) -> CapHamiltonian:
    return CapHamiltonian(radial)


# ---------------------------------------------------------------------------
# JSON wire format

_EXPR_NAMES = {
    "pi": math.pi,
    "e": math.e,
    "sin": np.sin,
    "cos": np.cos,
    "tan": np.tan,
    "exp": np.exp,
    "log": np.log,
    "sqrt": np.sqrt,
    "abs": np.abs,
    "minimum": np.minimum,
    "maximum": np.maximum,
    "where": np.where,
}


def _compile_expr(expr: str, var: str):
    code = compile(expr, "<hamiltonian>", "eval")
    for name in code.co_names:
        if name not in _EXPR_NAMES and name not in (var, "t"):
            raise HamiltonianError(f"unknown name {name!r} in expression {expr!r}")

    def func(t, x):
        ns = dict(_EXPR_NAMES)
        ns["t"] = t
        ns[var] = x
        return np.broadcast_to(np.asarray(eval(code, {"__builtins__": {}}, ns), dtype=float), np.shape(x)).copy()

    return func


def ham_from_dict(data: dict) -> Hamiltonian:
    try:
        kind = data["kind"]
        if kind == "z_profile":
            func = _compile_expr(data["expr"], "z")
            autonomous = bool(data.get("autonomous", "t" not in data["expr"]))
            support = None
            if "support" in data:
                support = (parse_fraction(data["support"][0]), parse_fraction(data["support"][1]))
            return CallableZProfile(func, autonomous=autonomous, support=support, label=data["expr"])
        if kind == "piecewise_linear":
            nodes = tuple((parse_fraction(z), parse_fraction(v)) for z, v in data["nodes"])
            return PLHamiltonian(PiecewiseLinearProfile(nodes))
        if kind == "radial":
            func = _compile_expr(data["expr"], "r")
            autonomous = bool(data.get("autonomous", "t" not in data["expr"]))
            R = float(parse_fraction(data.get("R", 1)))
            support = None
            if "support" in data:
                support = (float(parse_fraction(data["support"][0])), float(parse_fraction(data["support"][1])))
            return RadialHamiltonian(func, R=R, autonomous=autonomous, support=support, label=data["expr"])
        if kind == "grid":
            return GridHamiltonian(data["values"], autonomous=data.get("autonomous"))
        raise HamiltonianError(f"unknown Hamiltonian kind {kind!r}")
    except KeyError as exc:
        raise HamiltonianError(f"malformed Hamiltonian data: missing field {exc}") from exc


def ham_to_dict(H: Hamiltonian) -> dict:
    if isinstance(H, PLHamiltonian):
        return {
            "kind": "piecewise_linear",
            "nodes": [[format_fraction(z), format_fraction(v)] for z, v in H.profile.nodes],
        }
    if isinstance(H, CallableZProfile):
        out: dict = {"kind": "z_profile", "expr": H.label, "autonomous": H.autonomous}
        if H._support is not None:
            out["support"] = [format_fraction(parse_fraction(H._support[0])),
                              format_fraction(parse_fraction(H._support[1]))]
        return out
    if isinstance(H, RadialHamiltonian):
        return {"kind": "radial", "expr": H.label, "R": H.disc_radius, "autonomous": H.autonomous}
    if isinstance(H, GridHamiltonian):
        return {"kind": "grid", "values": H.values.tolist(), "autonomous": H.autonomous}
    raise HamiltonianError(f"cannot serialize {type(H).__name__}")
