import math
import random
from fractions import Fraction as F

import numpy as np
import pytest

from conftest import random_pl_profile, z_minus_half
from linkspec.hamiltonian import (
    CallableZProfile,
    GridHamiltonian,
    HamiltonianError,
    PiecewiseLinearProfile,
    PLHamiltonian,
    RadialHamiltonian,
    ResolutionError,
    bar,
    compose,
    compose_iterate,
    embed_in_cap,
    ham_from_dict,
    ham_to_dict,
    hofer_norm,
    integrate,
    integrate_exact,
    mean_normalize,
    parse_twist_expr,
    power_cutoff_profile,
    twist_calabi,
    twist_hamiltonian,
    twist_truncations,
)
from linkspec.quadrature import adaptive_quad


class TestIntegrate:
    def test_odd_profile_zero(self):
        assert abs(integrate(z_minus_half())) < 1e-12

    def test_constant(self):
        H = CallableZProfile(lambda t, z: 3.25 + 0 * z, autonomous=True)
        assert abs(integrate(H) - 3.25) < 1e-12

    def test_pl_exact(self):
        H = PLHamiltonian(PiecewiseLinearProfile(((F(0), F(0)), (F(1, 2), F(1)), (F(1), F(0)))))
        assert integrate_exact(H) == F(1, 2)
        assert abs(integrate(H) - 0.5) < 1e-15

    def test_time_dependent(self):
        H = CallableZProfile(lambda t, z: t * (z - 0.5) + t**2, autonomous=False)
        assert abs(integrate(H) - 1.0 / 3.0) < 1e-9

    def test_linearity(self):
        a = z_minus_half()
        b = CallableZProfile(lambda t, z: z * z, autonomous=True)
        assert abs(integrate(a + b) - integrate(a) - integrate(b)) < 1e-9

    def test_truncated_twist_against_riemann_oracle(self):
        # independent 2D midpoint-rule oracle on the disc, area form r dr dtheta
        prof = power_cutoff_profile(1.0, R=1.0)  # f = 1/r, truncation at f=c
        F_h = twist_hamiltonian(prof, 5.0)
        n = 4000
        rs = (np.arange(n) + 0.5) / n
        vals = F_h.value(0.0, rs)
        oracle = 2 * math.pi * float(np.sum(vals * rs)) / n
        assert abs(integrate(F_h) - oracle) < 5e-4 * max(1.0, abs(oracle))

    def test_quadrature_refinement_stable(self):
        f = lambda z: np.exp(np.sin(3 * z)) * (z - 0.25)
        coarse = adaptive_quad(f, 0.0, 1.0, rel_tol=1e-9)
        fine = adaptive_quad(f, 0.0, 1.0, rel_tol=1e-12)
        assert abs(coarse - fine) <= 10 * 1e-9 * max(1.0, abs(fine))


class TestMeanNormalize:
    def test_linear_profile(self):
        H = CallableZProfile(lambda t, z: z + 0 * z, autonomous=True)
        Hn = mean_normalize(H)
        assert abs(Hn.value(0.0, np.array([0.25]))[0] + 0.25) < 1e-12
        assert abs(integrate(Hn)) < 1e-9

    def test_idempotent(self):
        H = mean_normalize(CallableZProfile(lambda t, z: z * z, autonomous=True))
        H2 = mean_normalize(H)
        zs = np.linspace(0, 1, 11)
        assert np.allclose(H.value(0.0, zs), H2.value(0.0, zs), atol=1e-12)

    def test_pl_exact_idempotent(self):
        H = PLHamiltonian(PiecewiseLinearProfile(((F(0), F(1)), (F(1), F(3)))))
        Hn = mean_normalize(H)
        assert Hn.profile.integral() == 0
        assert mean_normalize(Hn).profile == Hn.profile

    def test_time_dependent(self):
        H = CallableZProfile(lambda t, z: t * z, autonomous=False)
        Hn = mean_normalize(H)
        for t in (0.0, 0.3, 1.0):
            assert abs(Hn.value(t, np.array([0.75]))[0] - (t * 0.75 - t / 2)) < 1e-12

    def test_preserves_hofer(self):
        H = random_pl_profile(random.Random(4))
        assert hofer_norm(mean_normalize(H)) == hofer_norm(H)


class TestHofer:
    def test_linear(self):
        assert abs(hofer_norm(z_minus_half()) - 1.0) < 1e-12

    def test_constant(self):
        H = CallableZProfile(lambda t, z: 2.0 + 0 * z, autonomous=True)
        assert hofer_norm(H) == 0.0

    def test_time_weighted(self):
        H = CallableZProfile(lambda t, z: t * (z - 0.5), autonomous=False)
        assert abs(hofer_norm(H) - 0.5) < 1e-9

    def test_scaling_and_bar_invariance(self):
        H = random_pl_profile(random.Random(8))
        h = hofer_norm(H)
        assert abs(hofer_norm(H.scaled(-3)) - 3 * h) < 1e-12
        assert abs(hofer_norm(bar(H)) - h) < 1e-12


class TestComposeBar:
    def test_iterate_is_scaling(self):
        H = z_minus_half()
        H3 = compose_iterate(H, 3)
        zs = np.linspace(0, 1, 9)
        assert np.allclose(H3.value(0.0, zs), 3 * H.value(0.0, zs))

    def test_bar_involution(self):
        H = CallableZProfile(lambda t, z: t * z * z, autonomous=False)
        HB = bar(bar(H))
        for t in (0.1, 0.7):
            zs = np.linspace(0, 1, 7)
            assert np.allclose(HB.value(t, zs), H.value(t, zs))

    def test_cancellation(self):
        H = z_minus_half()
        total = compose(H, H.scaled(-1))
        assert abs(integrate(total)) < 1e-12

    def test_calabi_homomorphism(self):
        a = random_pl_profile(random.Random(1))
        b = random_pl_profile(random.Random(2))
        assert integrate_exact(compose(a, b)) == integrate_exact(a) + integrate_exact(b)

    def test_compose_needs_flow(self):
        grid = GridHamiltonian(np.ones((8, 8)))
        with pytest.raises(HamiltonianError):
            compose(grid, z_minus_half())
        with pytest.raises(HamiltonianError):
            compose(z_minus_half(), grid)
        Ht = CallableZProfile(lambda t, z: t * z, autonomous=False)
        with pytest.raises(HamiltonianError):
            compose_iterate(Ht, 2)


class TestGrid:
    def test_constant_grid(self):
        H = GridHamiltonian(np.full((32, 32), 1.5))
        assert abs(integrate(H) - 1.5) < 1e-9

    def test_smooth_grid_integral(self):
        zs = np.linspace(0, 1, 401)
        thetas = np.linspace(0, 1, 64, endpoint=False)
        vals = (zs - 0.5)[:, None] + 0.0 * thetas[None, :]
        H = GridHamiltonian(vals)
        assert abs(integrate(H)) < 1e-9

    def test_resolution_error(self):
        rng = np.random.default_rng(0)
        H = GridHamiltonian(rng.normal(size=(6, 6)))
        with pytest.raises(ResolutionError):
            integrate(H)

    def test_min_max_scan(self):
        zs = np.linspace(0, 1, 101)
        thetas = np.linspace(0, 1, 32, endpoint=False)
        vals = (zs - 0.5)[:, None] + 0.1 * np.sin(2 * np.pi * thetas)[None, :]
        H = GridHamiltonian(vals)
        mn, mx = H.space_min_max(0.0)
        assert mn == pytest.approx(-0.6, abs=1e-6)
        assert mx == pytest.approx(0.6, abs=1e-6)


class TestTwist:
    def test_one_over_r_rejected(self):
        prof = power_cutoff_profile(1.0, R=1.0)
        assert not prof.is_divergent()
        with pytest.raises(HamiltonianError, match="not divergent"):
            twist_truncations(prof, 3)

    def test_r_minus_4_accepted(self):
        prof = power_cutoff_profile(4.0, R=1.0)
        assert prof.is_divergent()
        prof_blind = power_cutoff_profile(4.0, R=1.0)
        prof_blind.divergent = None  # force the numeric heuristic
        assert prof_blind.is_divergent()

    def test_truncations_monotone_and_divergent(self):
        prof = power_cutoff_profile(4.0, R=1.0)
        fams = twist_truncations(prof, 8)
        rs = np.linspace(1e-3, 1.0, 40)
        for Fa, Fb in zip(fams, fams[1:]):
            va, vb = Fa.value(0.0, rs), Fb.value(0.0, rs)
            assert np.all(vb >= va - 1e-9)
        vals = [integrate(Fi) for Fi in fams]
        assert all(b > a for a, b in zip(vals, vals[1:]))

    def test_footnote_identity(self):
        # int_0^R int_r^R s f(s) ds r dr = 1/2 int_0^R r^3 f(r) dr
        prof = power_cutoff_profile(4.0, R=1.0)
        level = 4.0**3
        F_h = twist_hamiltonian(prof, level)
        lhs = integrate(F_h)  # = 2 pi * int F r dr = 4 pi^2 * (double integral)
        rhs = twist_calabi(prof, level)  # = 2 pi^2 * int r^3 f
        assert abs(lhs - rhs) < 1e-6 * max(1.0, abs(rhs))

    def test_flow_convention(self):
        # F(r) = 2 pi int_r^R s f(s) ds gives dtheta/dt = -F'(r)/r = 2 pi f(r)
        prof = power_cutoff_profile(4.0, R=1.0)
        F_h = twist_hamiltonian(prof, 2.0)
        r0, h = 0.4, 1e-5
        deriv = (F_h.value(0, np.array([r0 + h]))[0] - F_h.value(0, np.array([r0 - h]))[0]) / (2 * h)
        f_trunc = min(prof.f(np.array([r0]))[0], 2.0)
        assert abs(-deriv / r0 - 2 * math.pi * f_trunc) < 1e-4

    def test_parse_expr(self):
        prof = parse_twist_expr("r^-4")
        assert prof.divergent
        with pytest.raises(HamiltonianError):
            parse_twist_expr("sin(r)")

    def test_levels_validation(self):
        prof = power_cutoff_profile(4.0, R=1.0)
        with pytest.raises(HamiltonianError):
            twist_truncations(prof, 3, levels=[2.0, 1.0, 3.0])

    def test_profile_shape_validation(self):
        from linkspec.hamiltonian import TwistProfile

        increasing = TwistProfile(f=lambda r: np.asarray(r, dtype=float), R=1.0, divergent=True)
        with pytest.raises(HamiltonianError, match="non-increasing"):
            twist_truncations(increasing, 2)
        no_cutoff = TwistProfile(
            f=lambda r: np.asarray(r, dtype=float) ** -4.0, R=1.0, divergent=True
        )
        with pytest.raises(HamiltonianError, match="vanish near"):
            twist_truncations(no_cutoff, 2)


class TestCap:
    def test_area_matching(self):
        prof = power_cutoff_profile(4.0, R=0.35)
        F_h = twist_hamiltonian(prof, 16.0)
        cap = embed_in_cap(F_h)
        assert abs(integrate(cap) - integrate(F_h)) < 1e-9
        lo, hi = cap.support()
        assert hi < 0.5  # stays inside the southern hemisphere

    def test_too_large_disc(self):
        big = RadialHamiltonian(lambda t, r: 0 * r, R=1.0)
        with pytest.raises(HamiltonianError):
            embed_in_cap(big)


class TestJson:
    def test_z_profile_roundtrip(self):
        H = ham_from_dict({"kind": "z_profile", "expr": "z - 1/2"})
        assert H.autonomous
        assert abs(integrate(H)) < 1e-12
        again = ham_from_dict(ham_to_dict(H))
        zs = np.linspace(0, 1, 5)
        assert np.allclose(H.value(0, zs), again.value(0, zs))

    def test_pl_roundtrip(self):
        H = PLHamiltonian(PiecewiseLinearProfile(((F(0), F(0)), (F(1, 3), F(2)), (F(1), F(0)))))
        again = ham_from_dict(ham_to_dict(H))
        assert again.profile == H.profile

    def test_grid_roundtrip(self):
        H = GridHamiltonian(np.linspace(0, 1, 64).reshape(8, 8))
        again = ham_from_dict(ham_to_dict(H))
        assert np.allclose(H.values, again.values)

    def test_unknown_names_rejected(self):
        with pytest.raises(HamiltonianError, match="unknown name"):
            ham_from_dict({"kind": "z_profile", "expr": "__import__('os')"})
        with pytest.raises(HamiltonianError, match="unknown name"):
            ham_from_dict({"kind": "z_profile", "expr": "q + z"})

    def test_unknown_kind(self):
        with pytest.raises(HamiltonianError):
            ham_from_dict({"kind": "mystery"})
