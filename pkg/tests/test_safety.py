import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from factories import lagged_model, lagged_scenario
from nnreach import (
    CellBox,
    HalfSpace,
    SafetySpec,
    Verdict,
    VerdictTag,
    Witness,
    box_satisfies,
    reach_narma,
    sample_trajectories,
    verify_narma,
    verify_tube,
)


def box(*pairs):
    return CellBox.from_pairs(pairs)


def spec(*rows):
    return SafetySpec.from_rows(rows)


class TestBoxSatisfies:
    def test_inside(self):
        assert box_satisfies(box([0, 1]), spec(([1], 16)))

    def test_pokes_out(self):
        assert not box_satisfies(box([15, 17]), spec(([1], 16)))

    def test_corner_max(self):
        b = box([0, 1], [0, 1])
        assert box_satisfies(b, spec(([1, 1], 2)))
        assert not box_satisfies(b, spec(([1, 1], 1.5)))

    def test_boundary_is_safe(self):
        assert box_satisfies(box([0, 16]), spec(([1], 16)))

    def test_negative_normal(self):
        assert box_satisfies(box([-1, 3]), spec(([-1], 1)))
        assert not box_satisfies(box([-1.5, 3]), spec(([-1], 1)))

    def test_whole_space(self):
        assert box_satisfies(box([-1e9, 1e9]), SafetySpec.whole_space())

    def test_dim_mismatch(self):
        with pytest.raises(ValueError):
            box_satisfies(box([0, 1]), spec(([1, 1], 2)))

    @settings(max_examples=300, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 12), k=st.integers(1, 4))
    def test_exact_vs_corners(self, seed, n, k):
        rng = np.random.default_rng(seed)
        lo = rng.uniform(-3, 3, n)
        b = CellBox.from_bounds(lo, lo + rng.uniform(0, 2, n))
        a = rng.normal(size=(k, n))
        a[rng.random(a.shape) < 0.2] = 0.0
        corners = list(itertools.product(*[(iv.lo, iv.hi) for iv in b.dims]))
        vals = np.array([[sum((ai * x for ai, x in zip(row, c)), 0.0) for row in a.tolist()] for c in corners])
        # offsets near the corner maxima so both outcomes are exercised; an
        # exact tie is included on purpose
        offs = vals.max(axis=0) + rng.normal(0, 0.5, k)
        offs[0] = vals[:, 0].max()
        s = SafetySpec.from_rows(list(zip(a, offs)))
        assert box_satisfies(b, s) == bool(np.all(vals <= offs))


class TestSpecTypes:
    def test_empty_needs_whole_space(self):
        with pytest.raises(ValueError):
            SafetySpec(())

    def test_mixed_dims(self):
        with pytest.raises(ValueError):
            spec(([1], 0), ([1, 1], 0))

    def test_nonfinite(self):
        with pytest.raises(ValueError):
            HalfSpace([np.inf], 0)

    def test_verdict_invariant(self):
        with pytest.raises(ValueError):
            Verdict(VerdictTag.SAFE, Witness(0, 0, 0))
        with pytest.raises(ValueError):
            Verdict(VerdictTag.UNCERTAIN)

    def test_holds_at(self):
        s = spec(([1, 0], 1), ([0, 1], 1))
        assert s.holds_at([1, 0.5]) and not s.holds_at([1.1, 0])


class TestVerify:
    def test_example2_safe(self, ex2_model, ex2_scenario):
        v = verify_narma(ex2_model, ex2_scenario)
        assert v.safe and v.witness is None and str(v) == "SAFE"

    def test_whole_space(self, ex2_model, ex2_scenario, maglev_model, maglev_scenario):
        assert verify_narma(ex2_model, ex2_scenario, SafetySpec.whole_space()).safe
        assert verify_narma(maglev_model, maglev_scenario, SafetySpec.whole_space()).safe

    def test_initial_violation(self, ex2_model, ex2_scenario):
        v = verify_narma(ex2_model, ex2_scenario, spec(([1], -100)))
        assert v.tag is VerdictTag.UNCERTAIN
        assert v.witness == Witness(0, 0, 0)
        assert str(v).startswith("UNCERTAIN k=0 ")

    def test_witness_points_at_first_bad_box(self, ex2_model, ex2_scenario):
        tube = reach_narma(ex2_model, ex2_scenario)
        cut = float(tube[1].upper.max()) - 1e-6
        v = verify_tube(tube, spec(([1], 100), ([1], cut)))
        assert v.witness.step == 1 and v.witness.constraint_index == 1
        assert tube[1].upper[v.witness.box_index, 0] > cut
        assert np.all(tube[1].upper[: v.witness.box_index, 0] <= cut)

    def test_missing_spec(self, ex2_model, ex2_scenario):
        with pytest.raises(ValueError):
            verify_narma(ex2_model, ex2_scenario.with_safety(None))

    def test_spec_dim(self, ex2_model, ex2_scenario):
        with pytest.raises(ValueError):
            verify_narma(ex2_model, ex2_scenario, spec(([1, 1], 16)))

    @pytest.mark.parametrize("bound", [8.6, 8.8, 9.0, 12.0, 16.0, 100.0])
    def test_monotone_in_safe_set(self, ex2_model, ex2_scenario, bound):
        tight = verify_narma(ex2_model, ex2_scenario, spec(([1], bound)))
        looser = verify_narma(ex2_model, ex2_scenario, spec(([1], bound + 1.0)))
        extra = verify_narma(ex2_model, ex2_scenario, spec(([1], bound), ([-1], 1.0)))
        if tight.safe:
            assert looser.safe
        if extra.safe:
            assert tight.safe

    def test_one_directional_soundness(self, ex2_model, ex2_scenario):
        s = ex2_scenario.safety
        assert verify_narma(ex2_model, ex2_scenario).safe
        trajs = sample_trajectories(ex2_model, ex2_scenario, 1000, seed=99)
        assert all(s.holds_at(x) for t in trajs for x in t.states)

    def test_one_directional_soundness_lagged(self):
        model = lagged_model()
        scen = lagged_scenario(model, horizon=8)
        tube = reach_narma(model, scen)
        env_hi = max(float(h.hi[0]) for h in tube.hulls)
        s = spec(([1, 0], env_hi))
        assert verify_tube(tube, s).safe
        trajs = sample_trajectories(model, scen, 1000, seed=5)
        assert all(s.holds_at(x) for t in trajs for x in t.states)
