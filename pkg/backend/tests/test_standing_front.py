"""
Tests for standing fronts and the reflection recurrence
"""
import pytest
import numpy as np
import sys
import os
import tempfile

# Add backend directory to Python path for imports
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from equilibria import branch_point, d_minus
from exceptions import NotFound, OutOfDomain
from models import Branch, Params, StandingProfile, Verdict
from standing_front import (
    dichotomy_holds,
    find_standing_front,
    jump_indices,
    orbit_from_profile,
    recurrence_residual,
    reflection_step,
    reflection_step_inverse,
    write_profile_csv,
)
from wave_criteria import classify


@pytest.fixture(scope="module")
def pinned_profile():
    """Standing front at a pinned parameter pair"""
    return find_standing_front(Params(a=0.45, d=0.02), N=128)


class TestReflectionStep:
    """Test the two-stage reflection map"""

    def test_pattern_is_fixed(self):
        """Test (u_B, v_B) maps to itself"""
        params = Params(a=0.45, d=0.02)
        point = branch_point(Branch.B, params)
        image = reflection_step(point, params)
        assert np.allclose(image, point, atol=1e-10)

    def test_origin_is_fixed(self):
        """Test (0, 0) maps to itself"""
        assert reflection_step((0.0, 0.0), Params(a=0.3, d=0.01)) == (0.0, 0.0)

    def test_inverse(self):
        """Test forward then inverse returns the input at the cusp"""
        params = Params(a=0.5, d=1.0 / 24.0)
        back = reflection_step_inverse(reflection_step((0.01, 0.01), params), params)
        assert np.allclose(back, (0.01, 0.01), atol=1e-13)


class TestFindStandingFront:
    """Test the Newton solve of the stationary system"""

    def test_pinned_front_found(self, pinned_profile):
        """Test residual, bounds and monotone sublattices"""
        u = pinned_profile.u
        assert u.shape == (128,)
        assert pinned_profile.residual_norm < 1e-10
        assert u.min() >= -1e-9 and u.max() <= 1.0 + 1e-9
        assert np.all(np.diff(u[0::2]) >= -1e-9)
        assert np.all(np.diff(u[1::2]) >= -1e-9)
        assert pinned_profile.left_ghost == 0.0

    def test_truncation_independence(self, pinned_profile):
        """Test the interior of the N = 256 front matches the N = 128 front"""
        wide = find_standing_front(Params(a=0.45, d=0.02), N=256)
        assert np.max(np.abs(wide.u[64 + 32:64 + 96] - pinned_profile.u[32:96])) < 1e-6

    def test_shifted_seed(self):
        """Test a seed shifted by one site still gives a valid front"""
        profile = find_standing_front(Params(a=0.45, d=0.02), N=128, shift=1)
        assert profile.residual_norm < 1e-10
        assert np.all(np.diff(profile.u[0::2]) >= -1e-9)

    def test_travelling_parameters(self):
        """Test no front exists near the cusp and the message marks it as evidence"""
        with pytest.raises(NotFound, match="not a proof"):
            find_standing_front(Params(a=0.5, d=0.0415), N=128)

    @pytest.mark.slow
    def test_agrees_with_criteria(self):
        """Test pinned verdicts admit a front and travelling verdicts do not, on random nine-root points"""
        rng = np.random.default_rng(2024)
        decided = 0
        for _ in range(30):
            a = float(rng.uniform(0.1, 0.9))
            params = Params(a=a, d=float(rng.uniform(0.05, 0.95)) * d_minus(a))
            verdict = classify(params).verdict
            if verdict == Verdict.PROVEN_TRAVELLING:
                with pytest.raises(NotFound):
                    find_standing_front(params, N=128)
                decided += 1
            elif verdict == Verdict.PROVEN_PINNED:
                assert find_standing_front(params, N=128).residual_norm < 1e-10
                decided += 1
        assert decided > 0

    def test_invalid_lattice(self):
        """Test odd or short lattices are rejected"""
        with pytest.raises(OutOfDomain):
            find_standing_front(Params(a=0.45, d=0.02), N=63)
        with pytest.raises(OutOfDomain):
            find_standing_front(Params(a=0.45, d=0.02), N=32)

    def test_outside_nine_root_region(self):
        """Test parameters without a stable pattern are rejected"""
        with pytest.raises(OutOfDomain):
            find_standing_front(Params(a=0.5, d=0.05), N=128)


class TestOrbit:
    """Test planar orbits extracted from standing fronts"""

    def test_recurrence(self, pinned_profile):
        """Test consecutive pairs satisfy the reflection step"""
        orbit = orbit_from_profile(pinned_profile)
        assert len(orbit) == 64
        assert recurrence_residual(orbit) < 1e-8

    def test_limits(self, pinned_profile):
        """Test the orbit runs from (0, 0) to (u_B, v_B)"""
        orbit = orbit_from_profile(pinned_profile)
        u_b, v_b = branch_point(Branch.B, pinned_profile.params)
        assert np.max(np.abs(orbit.points[0])) < 1e-3
        assert np.allclose(orbit.points[-1], (u_b, v_b), atol=1e-3)

    def test_dichotomy_and_single_jump(self, pinned_profile):
        """Test every point lies in one of the two boxes and the orbit jumps once"""
        orbit = orbit_from_profile(pinned_profile)
        assert dichotomy_holds(orbit)
        assert len(jump_indices(orbit)) == 1

    def test_constant_zero_profile(self):
        """Test the zero profile gives the zero orbit"""
        profile = StandingProfile(u=np.zeros(64), params=Params(a=0.45, d=0.02), residual_norm=0.0)
        orbit = orbit_from_profile(profile)
        assert np.all(orbit.points == 0.0)
        assert recurrence_residual(orbit) == 0.0

    def test_rejects_inaccurate_profile(self):
        """Test profiles with large residuals are refused"""
        profile = StandingProfile(u=np.zeros(64), params=Params(a=0.45, d=0.02), residual_norm=1e-3)
        with pytest.raises(ValueError):
            orbit_from_profile(profile)


class TestProfileExport:
    """Test CSV export"""

    def setup_method(self):
        self.path = os.path.join(tempfile.mkdtemp(), "profile.csv")

    def teardown_method(self):
        if os.path.exists(self.path):
            os.unlink(self.path)

    def test_columns(self, pinned_profile):
        """Test the header and one row per site"""
        write_profile_csv(pinned_profile, self.path)
        with open(self.path) as f:
            lines = f.read().splitlines()
        assert lines[0] == "j,u_j"
        assert len(lines) == 129
        assert float(lines[1].split(",")[1]) == pinned_profile.u[0]


if __name__ == "__main__":
    pytest.main([__file__])
