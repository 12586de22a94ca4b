"""
Tests for root enumeration, branch tracking and the bifurcation curves
"""
import pytest
import numpy as np
import sys
import os

# Add backend directory to Python path for imports
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from cubic_geometry import m_map_deriv, v_branch_deriv
from equilibria import (
    a_minus,
    bifurcation_curves,
    branch_point,
    count_roots,
    d_minus,
    d_plus,
    eval_G,
    in_omega_minus,
    jacobian_G,
    mirror_point,
    solve_equilibria,
    trace_branches,
    verify_asymptotics,
)
from exceptions import BoundaryDegenerate, OutOfDomain
from models import Branch, Params, Stability

SQRT3 = np.sqrt(3.0)


def oracle_roots(params, seeds=400, iterations=30):
    """Roots of G in [0, 1]^2 from vectorized Newton on a seed grid, deduplicated at 1e-7"""
    a, d = params.a, params.d
    u, v = np.meshgrid(np.linspace(0.0, 1.0, seeds), np.linspace(0.0, 1.0, seeds))
    u, v = u.ravel(), v.ravel()
    g = lambda x: x * (1.0 - x) * (x - a)
    dg = lambda x: -3.0 * x * x + 2.0 * (1.0 + a) * x - a
    with np.errstate(all="ignore"):
        for _ in range(iterations):
            f1 = 2.0 * d * (v - u) + g(u)
            f2 = 2.0 * d * (u - v) + g(v)
            j11, j22, j12 = dg(u) - 2.0 * d, dg(v) - 2.0 * d, 2.0 * d
            det = j11 * j22 - j12 * j12
            u, v = u - (j22 * f1 - j12 * f2) / det, v - (j11 * f2 - j12 * f1) / det
        residual = np.maximum(np.abs(2.0 * d * (v - u) + g(u)), np.abs(2.0 * d * (u - v) + g(v)))
    keep = np.isfinite(residual) & (residual < 1e-12) & (u > -1e-9) & (u < 1 + 1e-9) & (v > -1e-9) & (v < 1 + 1e-9)
    unique = []
    for point in zip(u[keep], v[keep]):
        if all(max(abs(point[0] - q[0]), abs(point[1] - q[1])) > 1e-7 for q in unique):
            unique.append(point)
    return unique


class TestJacobian:
    """Test the Jacobian of G"""

    def test_at_zero(self):
        """Test the closed form at the origin"""
        jac = jacobian_G((0.0, 0.0), Params(a=0.3, d=0.01))
        assert np.allclose(jac, [[-0.32, 0.02], [0.02, -0.32]], atol=1e-15)

    def test_singular_at_d_plus(self):
        """Test det = 0 at (a, a) when d = g'(a; a)/4"""
        jac = jacobian_G((0.5, 0.5), Params(a=0.5, d=1.0 / 16.0))
        assert abs(np.linalg.det(jac)) < 1e-15

    def test_one_is_stable(self):
        """Test det > 0 and trace < 0 at (1, 1)"""
        jac = jacobian_G((1.0, 1.0), Params(a=0.3, d=0.05))
        assert np.linalg.det(jac) > 0.0
        assert np.trace(jac) < 0.0


class TestSolveEquilibria:
    """Test enumeration of all roots"""

    @pytest.mark.parametrize("d,expected", [(0.02, 9), (0.05, 5), (0.07, 3)])
    def test_root_counts_at_half(self, d, expected):
        """Test the 9/5/3 counts at a = 1/2"""
        assert count_roots(Params(a=0.5, d=d)) == expected

    def test_residuals_and_swap_closure(self):
        """Test every root solves G = 0 and the set is closed under (u, v) -> (v, u)"""
        params = Params(a=0.4, d=0.01)
        roots = solve_equilibria(params)
        for root in roots:
            assert np.max(np.abs(eval_G((root.u, root.v), params))) < 1e-10
            assert any(abs(other.u - root.v) < 1e-12 and abs(other.v - root.u) < 1e-12 for other in roots)

    def test_small_coupling_limit(self):
        """Test branch B approaches (0, 1) as d -> 0"""
        roots = solve_equilibria(Params(a=0.45, d=1e-4))
        b = next(root for root in roots if root.branch == Branch.B)
        assert b.u < 1e-2 and b.v > 1.0 - 1e-2

    def test_mirror_symmetry(self):
        """Test roots at (a, d) map to roots at (1 - a, d)"""
        left = solve_equilibria(Params(a=0.35, d=0.008))
        right = solve_equilibria(Params(a=0.65, d=0.008))
        assert len(left) == len(right)
        for root in left:
            image = mirror_point((root.u, root.v))
            assert any(max(abs(image[0] - r.u), abs(image[1] - r.v)) < 1e-10 for r in right)

    def test_labels_follow_mirror(self):
        """Test A at a > 1/2 is the mirror image of C at 1 - a"""
        right = {root.branch: (root.u, root.v) for root in solve_equilibria(Params(a=0.65, d=0.008))}
        left = {root.branch: (root.u, root.v) for root in solve_equilibria(Params(a=0.35, d=0.008))}
        assert np.allclose(right[Branch.A], mirror_point(left[Branch.C]), atol=1e-10)
        assert np.allclose(right[Branch.B], mirror_point(left[Branch.B]), atol=1e-10)

    def test_stability_classes(self):
        """Test B is a stable node while A and C are saddles inside the nine-root region"""
        rng = np.random.default_rng(3)
        for _ in range(20):
            a = rng.uniform(0.1, 0.9)
            d = rng.uniform(0.05, 0.9) * d_minus(a)
            labels = {root.branch: root.stability for root in solve_equilibria(Params(a=a, d=d))}
            assert labels[Branch.B] == Stability.STABLE_NODE
            assert labels[Branch.A] == Stability.SADDLE
            assert labels[Branch.C] == Stability.SADDLE

    def test_counts_non_increasing_in_d(self):
        """Test root counts never grow with d at fixed a"""
        a = 0.3
        boundaries = (d_minus(a), d_plus(a))
        ds = [d for d in np.linspace(0.001, 0.07, 40) if min(abs(d - b) for b in boundaries) > 1e-5]
        counts = [count_roots(Params(a=a, d=d)) for d in ds]
        assert all(x >= y for x, y in zip(counts, counts[1:]))
        assert counts[0] == 9 and counts[-1] == 3

    def test_boundary_refused(self):
        """Test counts on the bifurcation curves are refused"""
        with pytest.raises(BoundaryDegenerate):
            solve_equilibria(Params(a=0.3, d=d_minus(0.3)))
        with pytest.raises(BoundaryDegenerate):
            solve_equilibria(Params(a=0.3, d=d_plus(0.3)))

    def test_zero_coupling_refused(self):
        """Test d = 0 is outside the solver's domain"""
        with pytest.raises(OutOfDomain):
            solve_equilibria(Params(a=0.3, d=0.0))

    @pytest.mark.parametrize("a,d", [
        (0.2, 0.002), (0.3, 0.004), (0.45, 0.02), (0.5, 0.02), (0.55, 0.045),
        (0.7, 0.005), (0.35, 0.05), (0.8, 0.03), (0.6, 0.07), (0.25, 0.03),
    ])
    def test_matches_grid_oracle(self, a, d):
        """Test the root set equals the brute-force Newton oracle"""
        params = Params(a=a, d=d)
        roots = solve_equilibria(params)
        expected = oracle_roots(params)
        assert len(roots) == len(expected)
        for u, v in expected:
            assert any(max(abs(u - r.u), abs(v - r.v)) < 1e-7 for r in roots)


class TestBifurcationCurves:
    """Test d_-(a), d_+(a) and a_-(d)"""

    def test_d_plus(self):
        """Test the closed form d_+ = a(1 - a)/4"""
        assert d_plus(0.5) == 0.0625
        assert d_plus(0.0) == 0.0
        assert d_plus(0.3) == pytest.approx(0.0525, abs=1e-17)

    def test_d_minus_at_cusp(self):
        """Test d_-(1/2) = 1/24"""
        assert d_minus(0.5) == pytest.approx(1.0 / 24.0, abs=1e-8)

    @pytest.mark.parametrize("a", [0.1, 0.2, 0.3, 0.4])
    def test_d_minus_symmetry(self, a):
        """Test d_-(a) = d_-(1 - a)"""
        assert abs(d_minus(a) - d_minus(1.0 - a)) < 1e-9

    def test_d_minus_corner_value(self):
        """Test d_-(0.1) against a^2/8 + a^4/32 with an O(a^5) remainder"""
        a = 0.1
        assert abs(d_minus(a) - (a ** 2 / 8.0 + a ** 4 / 32.0)) / a ** 5 < 0.1

    def test_curves_bundle(self):
        """Test bifurcation_curves carries d_-(a) and d_+(a)"""
        curves = bifurcation_curves(0.3)
        assert curves.a == 0.3
        assert curves.d_minus == d_minus(0.3)
        assert curves.d_plus == pytest.approx(0.0525, abs=1e-15)
        assert curves.d_minus < curves.d_plus

    def test_nine_root_region_membership(self):
        """Test in_omega_minus agrees with the root count on both sides of d_-"""
        dm = d_minus(0.4)
        inside, outside = Params(a=0.4, d=0.9 * dm), Params(a=0.4, d=1.1 * dm)
        assert in_omega_minus(inside) and count_roots(inside) == 9
        assert not in_omega_minus(outside) and count_roots(outside) == 5
        assert not in_omega_minus(Params(a=0.4, d=0.0))

    def test_d_minus_increasing(self):
        """Test d_- increases on [0.05, 0.5] and stays below d_+"""
        a = np.linspace(0.05, 0.5, 12)
        values = np.array([d_minus(x) for x in a])
        assert np.all(np.diff(values) > 0.0)
        assert np.all(values < a * (1.0 - a) / 4.0)

    @pytest.mark.parametrize("a", [0.3, 0.45])
    def test_tangency_at_d_plus(self, a):
        """Test m'(a) = -1 = v_-'(a) when d = d_+(a)"""
        params = Params(a=a, d=d_plus(a))
        assert m_map_deriv(a, params) == pytest.approx(-1.0, abs=1e-9)
        assert v_branch_deriv(a, a, "minus") == pytest.approx(-1.0, abs=1e-9)

    def test_a_minus_inverts_d_minus(self):
        """Test a_-(d_-(a)) = a below the cusp"""
        assert a_minus(d_minus(0.35)) == pytest.approx(0.35, abs=1e-7)

    def test_a_minus_near_cusp(self):
        """Test the leading cusp behaviour 1/2 - sqrt(1152 delta^3)"""
        delta = 1e-3
        assert a_minus(1.0 / 24.0 - delta) == pytest.approx(0.5 - np.sqrt(1152.0 * delta ** 3), abs=1e-4)


class TestBranchPoint:
    """Test individual branches"""

    def test_exact_values_at_zero_coupling(self):
        """Test A = (0, a) at d = 0"""
        assert branch_point(Branch.A, Params(a=0.45, d=0.0)) == (0.0, 0.45)

    def test_d_branch_ends_at_homogeneous_state(self):
        """Test D = (a, a) at d = d_+(a)"""
        u, v = branch_point(Branch.D, Params(a=0.45, d=d_plus(0.45)))
        assert u == pytest.approx(0.45, abs=1e-12) and v == pytest.approx(0.45, abs=1e-12)

    def test_b_at_cusp(self):
        """Test B at (1/2, 1/24) equals (1/2 - sqrt(3)/6, 1/2 + sqrt(3)/6)"""
        u, v = branch_point(Branch.B, Params(a=0.5, d=1.0 / 24.0))
        assert u == pytest.approx(0.5 - SQRT3 / 6.0, abs=1e-8)
        assert v == pytest.approx(0.5 + SQRT3 / 6.0, abs=1e-8)

    def test_ordering(self):
        """Test u_A < u_B < u_C < a < v_A < v_B < v_C"""
        params = Params(a=0.4, d=0.01)
        (ua, va), (ub, vb), (uc, vc) = (branch_point(b, params) for b in (Branch.A, Branch.B, Branch.C))
        assert ua < ub < uc < 0.4 < va < vb < vc

    def test_residual_and_swapped_label(self):
        """Test branch points solve G = 0 and swapped labels exchange coordinates"""
        params = Params(a=0.7, d=0.006)
        for branch in (Branch.A, Branch.B, Branch.C):
            point = branch_point(branch, params)
            assert np.max(np.abs(eval_G(point, params))) < 1e-10
            assert branch_point(branch.swapped(), params) == (point[1], point[0])

    def test_continuous_at_d_minus(self):
        """Test B and C meet at their fold on d = d_-(a)"""
        a = 0.3
        params = Params(a=a, d=d_minus(a))
        b, c = branch_point(Branch.B, params), branch_point(Branch.C, params)
        assert np.allclose(b, c, atol=1e-9)
        assert np.max(np.abs(eval_G(b, params))) < 1e-10

    def test_domain_errors(self):
        """Test B above d_- and D below d_- are rejected"""
        with pytest.raises(OutOfDomain):
            branch_point(Branch.B, Params(a=0.3, d=0.03))
        with pytest.raises(OutOfDomain):
            branch_point(Branch.D, Params(a=0.3, d=0.005))


class TestTraceBranches:
    """Test continuation of the branches in d"""

    def test_agrees_with_branch_point(self):
        """Test traced A, B, C match the direct computation"""
        a = 0.4
        ds = np.linspace(0.0, 0.9 * d_minus(a), 10)
        samples = trace_branches(a, ds)
        for sample in samples:
            if sample.d == 0.0:
                continue
            expected = branch_point(sample.branch, Params(a=a, d=sample.d))
            assert sample.u == pytest.approx(expected[0], abs=1e-9)
            assert sample.v == pytest.approx(expected[1], abs=1e-9)
        assert {s.branch for s in samples} == {Branch.A, Branch.B, Branch.C}

    def test_a_continues_as_d(self):
        """Test only the continuation of A survives past d_-(a), relabelled D"""
        a = 0.4
        dm, dp = d_minus(a), d_plus(a)
        ds = [0.5 * dm, 0.5 * (dm + dp)]
        samples = trace_branches(a, ds)
        beyond = [s for s in samples if s.d > dm]
        assert [s.branch for s in beyond] == [Branch.D]
        expected = branch_point(Branch.D, Params(a=a, d=ds[1]))
        assert beyond[0].u == pytest.approx(expected[0], abs=1e-9)

    def test_rejects_unsorted_values(self):
        """Test d values must increase"""
        with pytest.raises(ValueError):
            trace_branches(0.3, [0.01, 0.005])


class TestAsymptotics:
    """Test the expansion checks"""

    def test_corner_expansion(self):
        """Test d_- against a^2/8 + a^4/32 as a -> 0"""
        report = verify_asymptotics("corner_a0", [0.04, 0.06, 0.08, 0.10])
        assert report.passed
        assert len(report.extras) == 8

    def test_corner_sample_at_zero(self):
        """Test the a = 0 sample has vanishing value and expansion"""
        report = verify_asymptotics("corner_a0", [0.0, 0.1])
        assert report.samples[0].computed == 0.0
        assert report.samples[0].expansion == 0.0

    def test_cusp_expansion(self):
        """Test a_-(d) against 1/2 - sqrt(1152 delta^3)"""
        report = verify_asymptotics("cusp", [4e-4, 1e-3, 2e-3])
        assert report.passed

    def test_b_branch_near_one(self):
        """Test u_B(a, d_-(a)) against (1-a)^2/4 + (1-a)^3/8"""
        report = verify_asymptotics("corner_a1", [0.04, 0.06, 0.08, 0.10])
        assert report.passed

    def test_samples_outside_validity(self):
        """Test samples outside the expansion neighbourhoods are rejected"""
        with pytest.raises(OutOfDomain):
            verify_asymptotics("cusp", [0.01])


if __name__ == "__main__":
    pytest.main([__file__])
