import math

import numpy as np
import pytest

from ntn_nbiot.orbit import PassScenario, pass_geometry


@pytest.fixture(scope="session")
def overhead_pass():
    return pass_geometry(PassScenario(alpha_max=90.0, alpha_min=30.0, sample_step=0.1))


@pytest.fixture(scope="session")
def feeder_pass():
    return pass_geometry(PassScenario(alpha_max=90.0, alpha_min=10.0, sample_step=0.1))


def vector_slant_range(t, scenario, cross_track, angular_rate):
    """Distance between explicit 3-D positions, independent of the law of cosines.

    The satellite circles in the x-z plane; the UE sits on the sphere rotated
    out of that plane by the cross-track angle.
    """
    earth = scenario.earth
    r_s = earth.r_e + scenario.orbit.h0
    t = np.asarray(t, dtype=float)
    sat = np.stack(
        [r_s * np.sin(angular_rate * t), np.zeros_like(t), r_s * np.cos(angular_rate * t)], axis=-1
    )
    ue = earth.r_e * np.array([0.0, math.sin(cross_track), math.cos(cross_track)])
    return np.linalg.norm(sat - ue, axis=-1)


def bisect_elevation(target_deg, radius_ratio, tol=1e-12):
    """Central angle with the requested elevation, by bisection on the monotone branch."""
    lo, hi = 0.0, math.acos(radius_ratio)

    def elev(g):
        return math.degrees(math.atan2(math.cos(g) - radius_ratio, math.sin(g)))

    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if elev(mid) > target_deg:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
