import numpy as np
import pytest

from nctorus import algebra, builders, verifier
from nctorus.builders import (
    BandCollision,
    Edit,
    InfeasibleEpsilon,
    InvalidBand,
    NoBumpToDeform,
    PlacementError,
    ProjectionSpec,
)

pytestmark = pytest.mark.filterwarnings("ignore::nctorus.algebra.DegenerateThetaWarning")

SQRT2_2 = 0.70710678
T_GLUE = 0.28867513
T_CUT = 0.17677670
CFG = verifier.VerifyConfig(oracle_trials=20)

FILLED = ProjectionSpec(T_CUT, 3, 0.04, edits=(Edit("bump", 1, 0.03), Edit("bump", 2, 0.03)))


def assert_projection(p, tol=1e-9):
    rep = verifier.verify(p, CFG)
    assert rep.pass_, rep.to_json()
    return rep


class TestPowerRieffel:
    def test_trace_order_one(self):
        p = builders.power_rieffel(SQRT2_2, 1, 0.1, "smoothstep")
        assert algebra.trace(p) == pytest.approx(SQRT2_2, abs=1e-9)
        assert set(p.coeffs) == {-1, 0, 1}
        assert_projection(p)

    def test_trace_uses_fractional_part(self):
        p = builders.power_rieffel(SQRT2_2, 3, 0.05)
        assert algebra.trace(p) == pytest.approx(3 * SQRT2_2 - 2, abs=1e-9)
        assert algebra.trace(p) == pytest.approx(0.12132034, abs=1e-9)
        assert_projection(p)

    def test_eps_too_wide(self):
        with pytest.raises(InfeasibleEpsilon):
            builders.power_rieffel(SQRT2_2, 1, 0.8)

    def test_eps_wraps_past_one(self):
        # frac(7 theta) = 0.9497..., eps + frac >= 1
        with pytest.raises(InfeasibleEpsilon):
            builders.power_rieffel(SQRT2_2, 7, 0.06)

    def test_eps_must_be_positive(self):
        with pytest.raises(InfeasibleEpsilon):
            builders.power_rieffel(SQRT2_2, 1, 0.0)

    def test_bad_order(self):
        with pytest.raises(ValueError):
            builders.power_rieffel(SQRT2_2, 0, 0.1)

    def test_shape(self):
        eps = 0.1
        p = builders.power_rieffel(SQRT2_2, 1, eps, "linear")
        p0, p1 = p.coeff(0), p.coeff(1)
        assert p0(eps / 2) == pytest.approx(0.5)
        assert p0(0.4) == 1.0 and p0(0.9) == 0.0
        assert p0(SQRT2_2 + eps / 2) == pytest.approx(0.5)
        assert p1(eps / 2) == pytest.approx(0.5)
        assert p1(0.5) == 0.0
        # p_{-1}(x) = p_1(x - theta)
        x = np.linspace(0, 1, 999)
        np.testing.assert_allclose(p.coeff(-1)(x), p1(x - SQRT2_2), atol=1e-15)

    @pytest.mark.parametrize("profile", ["linear", "cosine", "smoothstep"])
    def test_profiles(self, profile):
        p = builders.power_rieffel(SQRT2_2, 2, 0.1, profile)
        assert algebra.trace(p) == pytest.approx(2 * SQRT2_2 - 1, abs=1e-9)
        assert_projection(p)

    def test_sweep_traces_distinct(self):
        traces = []
        for M in range(1, 11):
            p = builders.power_rieffel(SQRT2_2, M, builders.default_eps(SQRT2_2, M))
            traces.append(algebra.trace(p))
            assert traces[-1] == pytest.approx((M * SQRT2_2) % 1, abs=1e-9)
        assert len(set(np.round(traces, 6))) == 10

    def test_rational_theta_warns(self):
        with pytest.warns(algebra.DegenerateThetaWarning):
            builders.power_rieffel(0.25, 1, 0.1)


class TestGlue:
    def test_trace_raised(self):
        p = builders.glue(builders.power_rieffel(T_GLUE, 2, 0.05), 1, 0.05)
        assert algebra.trace(p) == pytest.approx(3 * T_GLUE, abs=1e-9)
        assert algebra.order(p) == 2
        assert p.coeff(1).sup_norm() > 1e-3
        assert_projection(p)

    def test_layout(self):
        eps = 0.05
        p = builders.glue(builders.power_rieffel(T_GLUE, 2, eps, "linear"), 1, eps, "linear")
        p0 = p.coeff(0)
        start = 2 * T_GLUE + eps
        assert p0(start + eps / 2) == pytest.approx(0.5)
        assert p0((start + eps + 3 * T_GLUE + eps) / 2) == 1.0
        assert p0(3 * T_GLUE + eps + eps / 2) == pytest.approx(0.5)
        assert p0(0.99) == 0.0

    def test_same_band_twice(self):
        p = builders.glue(builders.power_rieffel(0.1, 4, 0.02), 1, 0.02)
        with pytest.raises(BandCollision):
            builders.glue(p, 1, 0.02)

    def test_extent_violation(self):
        # 0.05 + 0.05 + 3 * 0.31 = 1.03 >= 1
        with pytest.raises(InfeasibleEpsilon, match=r"n\*theta"):
            builders.glue(builders.power_rieffel(0.31, 2, 0.05), 1, 0.05)

    def test_eps_sum_violation(self):
        with pytest.raises(InfeasibleEpsilon, match=r"sum\(eps\) = .* >= theta"):
            builders.glue(builders.power_rieffel(T_GLUE, 2, 0.15), 1, 0.15)

    def test_maximal_chain(self):
        # all k = 1..M-1 glued on top of the base: trace M(M+1)/2 theta
        theta, M = 0.09, 4
        p = builders.power_rieffel(theta, M, 0.01)
        for k in (3, 2, 1):
            p = builders.glue(p, k, 0.01)
        assert algebra.trace(p) == pytest.approx(M * (M + 1) / 2 * theta, abs=1e-9)
        assert_projection(p)

    def test_needs_construction(self):
        with pytest.raises(builders.BuilderError):
            builders.glue(algebra.one(T_GLUE), 1, 0.01)


class TestCut:
    def test_trace_lowered(self):
        p = builders.cut(builders.power_rieffel(T_CUT, 3, 0.04), 1, 0.04)
        assert algebra.trace(p) == pytest.approx(2 * T_CUT, abs=1e-9)
        assert algebra.order(p) == 3
        assert_projection(p)

    def test_k_equal_M_rejected(self):
        with pytest.raises(InvalidBand):
            builders.cut(builders.power_rieffel(T_CUT, 3, 0.04), 3, 0.04)

    def test_infeasible_base(self):
        # M theta = 0.9 forces eps_M < 0.1
        with pytest.raises(InfeasibleEpsilon):
            builders.cut(builders.power_rieffel(0.3, 3, 0.15), 1, 0.01)

    def test_two_cuts_and_a_glue(self):
        theta = 0.07
        p = builders.power_rieffel(theta, 6, 0.01)
        p = builders.cut(p, 1, 0.01)
        p = builders.cut(p, 2, 0.01)
        p = builders.glue(p, 3, 0.01)
        assert algebra.trace(p) == pytest.approx((6 - 1 - 2 + 3) * theta, abs=1e-9)
        assert p.construction.expected_trace() == pytest.approx(algebra.trace(p), abs=1e-9)
        assert_projection(p)


class TestBump:
    def test_fills_free_band(self):
        base = builders.power_rieffel(T_CUT, 3, 0.04)
        p = builders.add_bump(base, 1, 0.03)
        assert algebra.trace(p) == pytest.approx(algebra.trace(base), abs=1e-9)
        assert algebra.order(p) == 3
        assert p.coeff(1).sup_norm() > 1e-3
        assert_projection(p)

    def test_boundary_zero(self):
        base = builders.power_rieffel(T_CUT, 3, 0.04)
        p = builders.add_bump(base, 2, 0.03, boundary="zero")
        assert algebra.trace(p) == pytest.approx(algebra.trace(base), abs=1e-9)
        assert_projection(p)

    def test_inside_ramp(self):
        base = builders.power_rieffel(T_CUT, 3, 0.04)
        with pytest.raises(PlacementError):
            builders.add_bump(base, 1, 0.03, delta_k=0.01)

    def test_wrong_plateau(self):
        base = builders.power_rieffel(T_CUT, 3, 0.04)
        # [0.1, 0.13] sits where p0 = 1 but its theta shift also lands where p0 = 1
        with pytest.raises(PlacementError, match="discontinuous"):
            builders.add_bump(base, 1, 0.03, delta_k=0.1)

    def test_overlapping_shifted_images(self):
        base = builders.power_rieffel(T_CUT, 3, 0.04)
        p = builders.add_bump(base, 1, 0.03)
        first = p.construction.bands[-1]
        # choose delta for band 2 whose 2 theta shift hits band 1's shifted arc
        delta = (first.start + T_CUT - 2 * T_CUT + 0.01) % 1.0
        with pytest.raises(PlacementError):
            builders.add_bump(p, 2, 0.03, delta_k=delta)

    def test_explicit_delta(self):
        base = builders.power_rieffel(T_CUT, 3, 0.04)
        delta = 2 * T_CUT + 0.04
        p = builders.add_bump(base, 1, 0.03, delta_k=delta)
        assert p.construction.bands[-1].start == delta
        assert_projection(p)

    def test_no_slot(self, monkeypatch):
        base = builders.power_rieffel(T_CUT, 3, 0.04)
        monkeypatch.setattr(builders, "_bump_candidates", lambda c, k, eps: [0.0, 0.01, 0.1])
        with pytest.raises(PlacementError, match="no free slot"):
            builders.add_bump(base, 1, 0.03)


class TestComplement:
    def test_identity(self):
        q = builders.complement(algebra.one(SQRT2_2))
        assert q.coeffs == {}
        assert algebra.trace(q) == 0.0

    def test_involution(self):
        p = builders.glue(builders.power_rieffel(T_GLUE, 2, 0.05), 1, 0.05)
        q = builders.complement(builders.complement(p))
        x = np.linspace(0, 1, 3001)
        for k in p.coeffs:
            np.testing.assert_array_equal(q.coeff(k)(x), p.coeff(k)(x))

    def test_trace(self):
        p = builders.complement(builders.power_rieffel(SQRT2_2, 1, 0.1))
        assert algebra.trace(p) == pytest.approx(0.29289322, abs=1e-9)
        assert_projection(p)

    def test_off_diagonal_untouched(self):
        p = builders.power_rieffel(SQRT2_2, 1, 0.1)
        q = builders.complement(p)
        assert q.coeffs[1] is p.coeffs[1] and q.coeffs[-1] is p.coeffs[-1]


class TestHomotopy:
    def test_endpoint_one_is_build(self):
        a, b = builders.homotopy(FILLED, 1.0), builders.build(FILLED)
        x = np.linspace(0, 1, 4001)
        for k in b.coeffs:
            np.testing.assert_array_equal(a.coeff(k)(x), b.coeff(k)(x))

    def test_endpoint_zero_is_base(self):
        a = builders.homotopy(FILLED, 0.0)
        base = builders.power_rieffel(T_CUT, 3, 0.04)
        assert algebra.max_pointwise_difference(a, base) <= 1e-10

    def test_midpoint_projection(self):
        rep = assert_projection(builders.homotopy(FILLED, 0.5))
        assert max(rep.residual_idempotent_in_band, rep.residual_eq0) < 1e-9

    def test_needs_bump(self):
        with pytest.raises(NoBumpToDeform):
            builders.homotopy(ProjectionSpec(T_CUT, 3, 0.04), 0.5)

    def test_range(self):
        with pytest.raises(ValueError):
            builders.homotopy(FILLED, 1.5)


class TestEpsilonFeasible:
    def test_true(self):
        assert builders.epsilon_feasible(0.2, [0.04, 0.03, 0.05], 3)

    def test_sum_too_large(self):
        assert not builders.epsilon_feasible(0.1, [0.04, 0.03, 0.05], 3)

    def test_glue_example(self):
        # 0.1 < 0.28867513 and 0.1 + 3 * 0.28867513 = 0.96602539 < 1
        assert builders.epsilon_feasible(T_GLUE, [0.05, 0.05], 3)

    def test_strict(self):
        assert not builders.epsilon_feasible(0.5, [0.25, 0.25], 0)
        assert not builders.epsilon_feasible(0.25, [0.125], 3.5)

    def test_nonpositive(self):
        assert not builders.epsilon_feasible(0.5, [0.1, 0.0], 1)


class TestBuild:
    def test_base_only(self):
        spec = ProjectionSpec(SQRT2_2, 1, 0.1)
        a, b = builders.build(spec), builders.power_rieffel(SQRT2_2, 1, 0.1)
        x = np.linspace(0, 1, 1001)
        for k in (-1, 0, 1):
            np.testing.assert_array_equal(a.coeff(k)(x), b.coeff(k)(x))

    def test_glue_and_bump(self):
        theta = 0.1
        spec = ProjectionSpec(theta, 4, 0.02, edits=(Edit("glue", 1, 0.02), Edit("bump", 2, 0.02),
                                                     Edit("bump", 3, 0.02)))
        p = builders.build(spec)
        assert algebra.trace(p) == pytest.approx(5 * theta, abs=1e-9)
        assert all(p.coeff(k).sup_norm() > 1e-3 for k in range(5))
        assert_projection(p)

    def test_error_carries_edit_index(self):
        spec = ProjectionSpec(T_GLUE, 2, 0.05, edits=(Edit("glue", 1, 0.2),))
        with pytest.raises(InfeasibleEpsilon) as info:
            builders.build(spec)
        assert info.value.edit_index == 0
        assert "edit 0" in str(info.value) and "theta" in str(info.value)

    def test_spec_json_round_trip(self):
        spec = ProjectionSpec(T_CUT, 3, 0.04, "cosine", (Edit("cut", 1, 0.02), Edit("bump", 2, 0.02, delta=0.5)),
                              complement=True, homotopy_t=0.25)
        assert ProjectionSpec.from_json(spec.to_json()) == spec

    def test_complement_flag(self):
        p = builders.build(ProjectionSpec(SQRT2_2, 1, 0.1, complement=True))
        assert algebra.trace(p) == pytest.approx(1 - SQRT2_2, abs=1e-9)

    def test_profile_independence(self):
        traces = [algebra.trace(builders.build(ProjectionSpec(T_GLUE, 2, 0.05, prof, (Edit("glue", 1, 0.05, prof),))))
                  for prof in ("linear", "smoothstep", "cosine")]
        assert max(traces) - min(traces) <= 2e-10

    def test_edit_validation(self):
        with pytest.raises(ValueError):
            Edit("stretch", 1, 0.1)
        with pytest.raises(ValueError):
            Edit("glue", 1, 0.1, delta=0.3)
