import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from factories import ACTS, random_box, random_layer, random_network
from nnreach import CellBox, CellBudgetError, Layer, Network, layer_bound, make_partition, reach_mlp
from nnreach.network import forward
from nnreach.reach import propagate_boxes


def box(*pairs):
    return CellBox.from_pairs(pairs)


class TestLayerBound:
    def test_identity(self):
        layer = Layer(np.eye(2), np.zeros(2), "linear")
        assert layer_bound(layer, box([0, 1], [-1, 0])) == box([0, 1], [-1, 0])

    def test_relu_sign_split(self):
        layer = Layer([[1.0, -1.0]], [0.0], "relu")
        assert layer_bound(layer, box([0, 1], [0, 1])) == box([0, 1])

    def test_linear_preactivation(self):
        layer = Layer([[1.0, -1.0]], [0.0], "linear")
        assert layer_bound(layer, box([0, 1], [0, 1])) == box([-1, 1])

    def test_dim_mismatch(self):
        with pytest.raises(ValueError):
            layer_bound(Layer(np.eye(2), np.zeros(2), "linear"), box([0, 1]))

    def test_example1_hidden_layer_vs_grid(self, ex1_net):
        layer = ex1_net.layers[0]
        cell = box([-1, -0.9], [-1, -0.9])
        g_lo, g_hi = oracles.grid_bounds(layer, cell, 200)
        out = layer_bound(layer, cell)
        assert out.lo == pytest.approx(g_lo, rel=1e-12)
        assert out.hi == pytest.approx(g_hi, rel=1e-12)

    def test_widen_eps_pads_outward(self, ex1_net):
        layer = ex1_net.layers[0]
        a = layer_bound(layer, box([0, 0.5], [0, 0.5]))
        b = layer_bound(layer, box([0, 0.5], [0, 0.5]), widen_eps=1e-9)
        assert np.allclose(b.lo, a.lo - 1e-9, rtol=0, atol=1e-15)
        assert np.allclose(b.hi, a.hi + 1e-9, rtol=0, atol=1e-15)

    def test_soundness_many_instances(self):
        rng = np.random.default_rng(1)
        for _ in range(1000):
            n_in, n_out = rng.integers(1, 9, size=2)
            layer = random_layer(rng, n_in, n_out)
            b = random_box(rng, n_in)
            out = layer_bound(layer, b)
            pts = rng.uniform(b.lo, b.hi, size=(1000, n_in))
            y = forward(Network((layer,)), pts)
            assert np.all(out.lo <= y) and np.all(y <= out.hi)

    @settings(max_examples=150, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), n_in=st.integers(1, 12), n_out=st.integers(1, 6), act=st.sampled_from(ACTS))
    def test_tight_at_corners(self, seed, n_in, n_out, act):
        rng = np.random.default_rng(seed)
        layer = random_layer(rng, n_in, n_out, act)
        b = random_box(rng, n_in)
        c_lo, c_hi = oracles.corner_bounds(layer, b)
        out = layer_bound(layer, b)
        assert out.lo == pytest.approx(c_lo, rel=1e-12)
        assert out.hi == pytest.approx(c_hi, rel=1e-12)

    @settings(max_examples=200, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), act=st.sampled_from(ACTS))
    def test_inclusion_monotone(self, seed, act):
        rng = np.random.default_rng(seed)
        n_in = int(rng.integers(1, 6))
        layer = random_layer(rng, n_in, int(rng.integers(1, 6)), act)
        outer = random_box(rng, n_in)
        t = np.sort(rng.uniform(0, 1, size=(2, n_in)), axis=0)
        inner = CellBox.from_bounds(outer.lo + t[0] * (outer.hi - outer.lo), outer.lo + t[1] * (outer.hi - outer.lo))
        inner = CellBox.from_bounds(np.maximum(inner.lo, outer.lo), np.minimum(inner.hi, outer.hi))
        assert layer_bound(layer, inner).issubset(layer_bound(layer, outer))


class TestReachMlp:
    def test_four_hundred_tubes(self, ex1_net, unit_box):
        res = reach_mlp(ex1_net, unit_box, [20, 20])
        assert len(res) == len(res.tubes) == 400

    def test_single_cell_is_folded_bound(self, ex1_net, unit_box):
        res = reach_mlp(ex1_net, unit_box, [1, 1])
        folded = unit_box
        for layer in ex1_net.layers:
            folded = layer_bound(layer, folded)
        assert res.tubes == [folded]
        assert res.hull == folded

    def test_hull_is_hull_of_tubes(self, ex1_net, unit_box):
        from nnreach import hull

        res = reach_mlp(ex1_net, unit_box, [7, 4])
        assert res.hull == hull(res.tubes)

    def test_tubes_follow_cell_order(self, ex1_net, unit_box):
        res = reach_mlp(ex1_net, unit_box, [3, 5])
        part = make_partition(unit_box, [3, 5])
        for i in (0, 4, 9, 14):
            folded = part.cell(i)
            for layer in ex1_net.layers:
                folded = layer_bound(layer, folded)
            assert res.tubes[i] == folded

    def test_monte_carlo_5000(self, ex1_net, unit_box):
        res = reach_mlp(ex1_net, unit_box, [10, 10])
        rng = np.random.default_rng(2)
        ys = forward(ex1_net, rng.uniform(-1, 1, size=(5000, 2)))
        assert all(res.contains(y) for y in ys)

    def test_refinement_nesting(self, ex1_net, unit_box):
        for m in (1, 3, 5, 10, 25):
            coarse = reach_mlp(ex1_net, unit_box, [m, m]).hull
            fine = reach_mlp(ex1_net, unit_box, [2 * m, 2 * m]).hull
            assert fine.issubset(coarse)

    def test_budget_error_names_count(self, ex1_net, unit_box):
        with pytest.raises(CellBudgetError, match="1002001"):
            reach_mlp(ex1_net, unit_box, [1001, 1001])
        with pytest.raises(CellBudgetError):
            reach_mlp(ex1_net, unit_box, [11, 10], max_cells=100)
        assert len(reach_mlp(ex1_net, unit_box, [11, 10], max_cells=None)) == 110

    def test_dim_mismatch(self, ex1_net):
        with pytest.raises(ValueError):
            reach_mlp(ex1_net, box([0, 1]), [2])
        with pytest.raises(ValueError):
            reach_mlp(ex1_net, box([0, 1], [0, 1]), [2])

    def test_thread_schedule_independent(self):
        rng = np.random.default_rng(3)
        net = random_network(rng, [3, 10, 10, 2])
        b = box([-1, 1], [-2, 0], [0, 3])
        serial = reach_mlp(net, b, [40, 40, 41])
        assert len(serial) > 2 * (1 << 15)
        for threads in (2, 5):
            par = reach_mlp(net, b, [40, 40, 41], threads=threads)
            assert par.lower.tobytes() == serial.lower.tobytes()
            assert par.upper.tobytes() == serial.upper.tobytes()

    def test_order_independent_under_permutation(self, ex1_net, unit_box):
        lo, hi = make_partition(unit_box, [9, 9]).bounds()
        a_lo, a_hi = propagate_boxes(ex1_net, lo, hi)
        perm = np.random.default_rng(4).permutation(lo.shape[0])
        b_lo, b_hi = propagate_boxes(ex1_net, lo[perm], hi[perm])
        assert np.array_equal(a_lo[perm], b_lo) and np.array_equal(a_hi[perm], b_hi)

    @settings(max_examples=40, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), depth=st.integers(1, 4))
    def test_deep_network_soundness(self, seed, depth):
        rng = np.random.default_rng(seed)
        widths = [int(rng.integers(1, 5))] + [int(rng.integers(1, 7)) for _ in range(depth)]
        net = random_network(rng, widths, hidden=ACTS[int(rng.integers(4))])
        b = random_box(rng, widths[0])
        counts = [int(rng.integers(1, 4)) for _ in widths[:1]] * widths[0]
        res = reach_mlp(net, b, counts)
        ys = forward(net, rng.uniform(b.lo, b.hi, size=(500, widths[0])))
        assert all(res.contains(y) for y in ys)
