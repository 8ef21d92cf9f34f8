import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from conftest import two_circle_sphere_link
from linkspec.surface_link import (
    Circle,
    LinkError,
    Region,
    Surface,
    SurfaceLink,
    build_equidistributed_sequence,
    build_parallel_link,
    check_monotone,
    equidistributed_eta_bound,
    infer_eta,
    lambda_closed_form,
    link_from_dict,
    link_to_dict,
    random_valid_link,
    validate_link,
)


class TestValidate:
    def test_two_circles_three_regions_valid(self):
        assert validate_link(two_circle_sphere_link()).ok

    def test_equator_valid(self):
        link = SurfaceLink(
            Surface(genus=0),
            (Circle("c1", level=F(1, 2)),),
            (Region("B1", F(1, 2), (("c1", +1),)), Region("B2", F(1, 2), (("c1", -1),))),
        )
        report = validate_link(link)
        assert report.ok
        assert link.s == link.k - link.surface.genus + 1

    def test_genus2_wrong_region_count(self):
        # s must equal k - g + 1 = 3, not 4
        circles = tuple(Circle(f"c{i}", contractible=False) for i in range(1, 5))
        regions = (
            Region("B1", F(1, 4), (("c1", +1), ("c2", +1))),
            Region("B2", F(1, 4), (("c1", -1), ("c2", -1))),
            Region("B3", F(1, 4), (("c3", +1), ("c4", +1))),
            Region("B4", F(1, 4), (("c3", -1), ("c4", -1))),
        )
        report = validate_link(SurfaceLink(Surface(genus=2), circles, regions))
        assert not report.ok
        assert any("s=k-g+1" in v for v in report.violations)

    def test_area_sum_violation(self):
        report = validate_link(two_circle_sphere_link(a3=F(1, 4)))
        assert any("sum to" in v for v in report.violations)

    def test_circle_incidence_violation(self):
        link = SurfaceLink(
            Surface(genus=0),
            (Circle("c1"), Circle("c2")),
            (
                Region("B1", F(1, 2), (("c1", +1),)),
                Region("B2", F(1, 4), (("c1", -1), ("c1", +1))),
                Region("B3", F(1, 4), (("c2", +1),)),
            ),
        )
        report = validate_link(link)
        assert any("incidences" in v or "c1" in v for v in report.violations)

    def test_self_incident_circle_warns(self):
        # a circle meeting the same region twice is legal but degenerate
        circles = (Circle("c1", contractible=False), Circle("c2", contractible=False))
        regions = (
            Region("B1", F(1, 2), (("c1", +1), ("c1", -1), ("c2", +1))),
            Region("B2", F(1, 2), (("c2", -1),)),
        )
        link = SurfaceLink(Surface(genus=1), circles, regions)
        report = validate_link(link)
        assert report.ok
        assert any("degenerate" in w for w in report.warnings)


class TestMonotone:
    def test_spec_example_monotone(self):
        rep = check_monotone(two_circle_sphere_link(), 0)
        assert rep.is_monotone and rep.lam == F(1, 3)

    def test_spec_example_not_monotone(self):
        rep = check_monotone(two_circle_sphere_link(F(1, 4), F(1, 2), F(1, 4)), 0)
        assert not rep.is_monotone and rep.lam is None

    def test_example_31_data(self):
        m = 7
        eta = F(1, 2 * m * (m - 1) + 5)
        lam = F(1, m + 1) + 2 * eta * F(m - 1, m + 1)
        link = build_equidistributed_sequence(m, eta_rule=lambda _: eta, m_min=m)[0]
        rep = check_monotone(link, eta)
        assert rep.is_monotone and rep.lam == lam

    def test_negative_eta_rejected(self):
        with pytest.raises(LinkError):
            check_monotone(two_circle_sphere_link(), F(-1, 10))

    def test_infer_eta(self):
        link = build_parallel_link(3, F(1, 8))
        assert infer_eta(link) == F(1, 8)
        assert infer_eta(two_circle_sphere_link(F(1, 4), F(1, 2), F(1, 4))) is None


class TestLambdaClosedForm:
    def test_values(self):
        assert lambda_closed_form(1, 0) == F(1, 2)
        assert lambda_closed_form(2, 0) == F(1, 3)
        assert lambda_closed_form(3, F(1, 8)) == F(3, 8)

    def test_eta_range(self):
        with pytest.raises(LinkError):
            lambda_closed_form(2, F(1, 4))
        with pytest.raises(LinkError):
            lambda_closed_form(3, F(-1, 8))
        # the one-component link is monotone for any eta
        assert lambda_closed_form(1, F(1, 2)) == F(1, 2)


class TestParallel:
    def test_equator(self):
        link = build_parallel_link(1, 0)
        assert [c.level for c in link.circles] == [F(1, 2)]
        assert sorted(r.area for r in link.regions) == [F(1, 2), F(1, 2)]

    def test_two_circles(self):
        link = build_parallel_link(2, 0)
        assert [c.level for c in link.circles] == [F(1, 3), F(2, 3)]
        assert all(r.area == F(1, 3) for r in link.regions)

    def test_two_circles_eta(self):
        link = build_parallel_link(2, F(1, 12))
        assert sorted(r.area for r in link.regions) == [F(2, 9), F(7, 18), F(7, 18)]
        rep = check_monotone(link, F(1, 12))
        assert rep.lam == F(7, 18)

    def test_matches_closed_form(self):
        rng = random.Random(7)
        for _ in range(60):
            k = rng.randint(1, 20)
            eta = F(rng.randint(0, 24), 100) if k >= 2 else F(rng.randint(0, 30), 10)
            link = build_parallel_link(k, eta)
            rep = check_monotone(link, eta)
            assert rep.is_monotone
            assert rep.lam == lambda_closed_form(k, eta)

    def test_infeasible(self):
        with pytest.raises(LinkError):
            build_parallel_link(2, F(1, 4))


class TestEquidistributed:
    def test_m2(self):
        link = build_equidistributed_sequence(2)[0]
        assert sorted(r.area for r in link.regions) == [F(1, 3), F(1, 3), F(1, 3)]

    def test_m10_eta(self):
        link = build_equidistributed_sequence(10, eta_rule=lambda m: F(1, 200), m_min=10)[0]
        assert link.regions[0].area == F(109, 1100)
        assert link.regions[-1].area == F(1, 110)

    def test_m1_rejected(self):
        with pytest.raises(LinkError):
            build_equidistributed_sequence(1, m_min=1)
        with pytest.raises(LinkError):
            equidistributed_eta_bound(1)

    def test_eta_rule_bound_enforced(self):
        with pytest.raises(LinkError):
            build_equidistributed_sequence(5, eta_rule=lambda m: F(1, 2 * m * (m - 1)), m_min=5)

    def test_family_invariants(self):
        for link in build_equidistributed_sequence(12):
            m = link.k
            assert validate_link(link).ok
            assert link.s == m + 1
            assert sum(r.area for r in link.regions) == 1
            assert sum(2 - r.boundary_count for r in link.regions) == 2
            alpha = link.regions[0].area
            complement = link.regions[-1].area
            # area inequalities with N = 0 non-contractible components
            assert F(1, m) >= alpha >= F(1, m + 1)
            assert complement <= alpha
            # realizations: flat discs with z-extent below 2*alpha
            for c in link.circles:
                lo, hi = c.z_extent()
                assert hi - lo < 2 * alpha

    def test_realizations_disjoint(self):
        link = build_equidistributed_sequence(9)[-1]
        extents = sorted(c.z_extent() for c in link.circles)
        for (_, hi), (lo, _) in zip(extents, extents[1:]):
            assert hi < lo


class TestRandomLinks:
    def test_thousand_random_links_hold_invariants(self):
        rng = random.Random(424242)
        for _ in range(1000):
            link = random_valid_link(rng, max_genus=3, max_k=12)
            g = link.surface.genus
            assert link.s == link.k - g + 1
            assert sum(r.area for r in link.regions) == link.surface.total_area
            assert sum(2 - r.boundary_count for r in link.regions) == 2 - 2 * g
            assert validate_link(link).ok

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=60, deadline=None)
    def test_generator_always_valid(self, seed):
        link = random_valid_link(random.Random(seed), max_genus=3, max_k=10)
        assert validate_link(link).ok


class TestJson:
    def test_roundtrip(self):
        link = build_parallel_link(3, F(1, 8))
        again = link_from_dict(link_to_dict(link))
        assert again == link

    def test_roundtrip_band_realizations(self):
        link = build_equidistributed_sequence(4)[-1]
        again = link_from_dict(link_to_dict(link))
        assert again == link

    def test_malformed(self):
        with pytest.raises(LinkError, match="malformed"):
            link_from_dict({"genus": 0, "circles": [{"id": "c1"}]})
        with pytest.raises(LinkError):
            link_from_dict(
                {
                    "genus": 0,
                    "total_area": 1,
                    "circles": [{"id": "c1"}],
                    "regions": [{"id": "B1", "area": "x/y", "boundary": [["c1", 1]]}],
                }
            )
