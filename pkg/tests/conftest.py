import random
from fractions import Fraction as F

import pytest

from linkspec.hamiltonian import (
    CallableZProfile,
    PiecewiseLinearProfile,
    PLHamiltonian,
)
from linkspec.surface_link import Circle, Region, Surface, SurfaceLink


def two_circle_sphere_link(a1=F(1, 3), a2=F(1, 3), a3=F(1, 3)):
    """Two circles on the sphere: discs of areas a1, a2 plus an annulus a3."""
    circles = (Circle("c1"), Circle("c2"))
    regions = (
        Region("B1", a1, (("c1", +1),)),
        Region("B2", a3, (("c1", -1), ("c2", -1))),
        Region("B3", a2, (("c2", +1),)),
    )
    return SurfaceLink(Surface(genus=0), circles, regions)


def z_minus_half():
    return CallableZProfile(lambda t, z: z - 0.5, autonomous=True, label="z - 1/2")


def random_pl_profile(rng: random.Random, n_interior: int = 4, vmax: int = 8) -> PLHamiltonian:
    """Random exact piecewise-linear z-profile with rational nodes."""
    zs = sorted(rng.sample(range(1, 64), n_interior))
    nodes = [(F(0), F(rng.randint(-vmax, vmax)))]
    nodes += [(F(z, 64), F(rng.randint(-vmax, vmax))) for z in zs]
    nodes += [(F(1), F(rng.randint(-vmax, vmax)))]
    return PLHamiltonian(PiecewiseLinearProfile(tuple(nodes)))


@pytest.fixture
def rng():
    return random.Random(20240817)
