import logging

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from movact.allen import CONSECUTIVE, CompositionTable, Configuration, Default, Mode, Relation, check_configuration
from movact.dynamics import LabelDynamics
from movact.segmenter import (
    CLOSED,
    OPENED,
    AllenGate,
    DegenerateBeliefError,
    FilterConfig,
    FilterState,
    FixedGate,
    InfeasibleError,
    InstanceTooLargeError,
    ProductGate,
    SegmentModel,
    brute_force_map,
    brute_force_posterior,
    build_segment_model,
    filter_step,
    gaussian_pmf,
    geometric_pmf,
    hazard,
    load_segment_model,
    map_segmentation,
    map_segmentation_from_loglik,
    predict_prior,
    run_online,
    save_segment_model,
    stream_log_likelihoods,
    unconstrained,
    update_belief,
)
from movact.segmenter.oracle import tilings


def dummy_models(labels, order=1, d=1):
    return [LabelDynamics(lab, np.zeros((order, d, d)), np.zeros(d), np.ones(d)) for lab in labels]


def random_instance(rng, T=None, L=None, D=None, d_min=2):
    L = L or int(rng.integers(1, 4))
    T = T or int(rng.integers(2, 11))
    D = D or int(rng.integers(d_min, 6))
    dur = rng.random((L, D))
    dur[:, :d_min - 1] = 0.0
    dur /= dur.sum(axis=1, keepdims=True)
    tr = rng.random((L, L))
    tr /= tr.sum(axis=1, keepdims=True)
    ini = rng.random(L)
    ini /= ini.sum()
    seg = SegmentModel(tuple(f"l{i}" for i in range(L)), tr, dur, ini)
    return seg, rng.normal(size=(T, L))


def run_loglik(seg, ll, gate=None, table=None):
    cfg = FilterConfig(seg, dummy_models(seg.labels), table=table, gate=gate, horizon=0)
    return run_online(np.zeros((ll.shape[0], 1)), cfg, loglik=ll)


def hmm_forward(initial, M, ll):
    """Plain forward recursion with per-step normalisation."""
    out = np.empty_like(ll)
    a = initial * np.exp(ll[0] - ll[0].max())
    out[0] = a / a.sum()
    for t in range(1, ll.shape[0]):
        a = (out[t - 1] @ M) * np.exp(ll[t] - ll[t].max())
        out[t] = a / a.sum()
    return out


class TestDurations:
    def test_geometric_constant_hazard(self):
        seg = build_segment_model(["a"], {"a": ("geometric", 0.1, 1, 20)})
        for tau in range(1, 20):
            assert hazard(seg, "a", tau) == pytest.approx(0.1, abs=1e-12)

    def test_hazard_one_at_dmax(self):
        seg = build_segment_model(["a", "b"], {"a": ("geometric", 0.3, 2, 9), "b": ("gaussian", 5, 2, 1, 7)})
        assert hazard(seg, "a", 9) == 1.0
        assert hazard(seg, "b", 9) == 1.0
        assert hazard(seg, 1, 7) == 1.0

    def test_gaussian_hazard_oracle(self):
        seg = build_segment_model(["a"], {"a": ("gaussian", 5, 1, 1, 10)})
        d = np.arange(1, 11)
        p = np.exp(-0.5 * (d - 5.0) ** 2)
        p /= p.sum()
        assert hazard(seg, "a", 5) == pytest.approx(p[4] / p[4:].sum(), abs=1e-12)

    def test_pmfs_normalised(self):
        assert geometric_pmf(0.2, 15, 3).sum() == pytest.approx(1.0, abs=1e-12)
        assert gaussian_pmf(10, 3, 4, 18).sum() == pytest.approx(1.0, abs=1e-12)
        assert geometric_pmf(0.2, 15, 3)[:2].sum() == 0.0

    def test_tau_validation(self):
        seg = build_segment_model(["a"], {"a": ("geometric", 0.5, 1, 4)})
        with pytest.raises(ValueError):
            hazard(seg, "a", 0)

    def test_model_validation(self):
        with pytest.raises(ValueError):
            SegmentModel(("a", "b"), [[0.5, 0.4], [0.5, 0.5]], np.ones((2, 1)), [0.5, 0.5])
        with pytest.raises(ValueError):
            SegmentModel(("a",), [[1.0]], [[0.5, 0.4]], [1.0])
        with pytest.raises(ValueError):
            build_segment_model(["a"], {"a": ("poisson", 3, 1, 5)})

    def test_file_round_trip(self, tmp_path):
        seg = build_segment_model(["x", "y"], {"x": ("geometric", 0.25, 1, 12), "y": ("gaussian", 6.5, 1.5, 2, 10)},
                                  [[0.2, 0.8], [0.7, 0.3]], [0.4, 0.6])
        save_segment_model(seg, tmp_path / "s.model")
        back = load_segment_model(tmp_path / "s.model")
        assert back.labels == seg.labels
        for name in ("transition", "durations", "initial"):
            assert np.array_equal(getattr(back, name), getattr(seg, name))


class TestPredictPrior:
    def config(self, seg):
        return FilterConfig(seg, dummy_models(seg.labels), horizon=0)

    def test_closed_single_label(self):
        seg = build_segment_model(["a"], {"a": ("geometric", 0.2, 1, 30)}, [[1.0]], [1.0])
        cfg = self.config(seg)
        state = FilterState()
        for _ in range(5):
            state = filter_step(state, cfg, [0.0]).state
            np.testing.assert_allclose(state.prior_marginal, [1.0], atol=1e-15)

    def test_full_mixing(self, rng):
        seg = SegmentModel(("a", "b"), np.full((2, 2), 0.5), [[1.0], [1.0]], [0.9, 0.1])
        la = np.log(rng.dirichlet([1, 1]))[:, None]
        prior = predict_prior(FilterState(1, la), self.config(seg))
        np.testing.assert_allclose(np.exp(prior).sum(axis=1), [0.5, 0.5], atol=1e-15)

    def test_dense_matrix_oracle(self, rng):
        L, D = 3, 4
        dur = rng.dirichlet(np.ones(D), size=L)
        seg = SegmentModel(("a", "b", "c"), rng.dirichlet(np.ones(L), size=L), dur, np.ones(L) / L)
        alpha = rng.dirichlet(np.ones(L * D)).reshape(L, D)
        h = seg.hazards
        # explicit (L*D) x (L*D) transition over flattened (label, tau) cells
        K = np.zeros((L * D, L * D))
        for i in range(L):
            for tau in range(D):
                src = i * D + tau
                if tau + 1 < D:
                    K[src, i * D + tau + 1] += 1 - h[i, tau]
                for j in range(L):
                    K[src, j * D] += h[i, tau] * seg.transition[i, j]
        expected = (alpha.ravel() @ K).reshape(L, D)
        expected /= expected.sum()
        got = np.exp(predict_prior(FilterState(1, np.log(alpha)), self.config(seg)))
        np.testing.assert_allclose(got, expected, atol=1e-12)


class TestUpdateBelief:
    def test_normalisation(self):
        prior = np.log(np.full((2, 1), 0.5))
        post = np.exp(update_belief(prior, np.log([0.2, 0.8])))
        np.testing.assert_allclose(post.sum(axis=1), [0.2, 0.8], atol=1e-15)

    def test_gate_annihilation(self):
        prior = np.log(np.full((2, 1), 0.5))
        post = np.exp(update_belief(prior, np.log([0.5, 0.5]), np.array([0.0, 1.0])))
        np.testing.assert_array_equal(post.sum(axis=1), [0.0, 1.0])

    def test_recomputation(self, rng):
        prior = rng.dirichlet(np.ones(8)).reshape(4, 2)
        lam, gate = rng.random(4), rng.random(4)
        expected = prior * (lam * gate)[:, None]
        expected /= expected.sum()
        got = np.exp(update_belief(np.log(prior), np.log(lam), gate))
        np.testing.assert_allclose(got, expected, atol=1e-12)

    def test_degenerate(self):
        with pytest.raises(DegenerateBeliefError):
            update_belief(np.log(np.full((2, 1), 0.5)), np.zeros(2), np.zeros(2))

    def test_gate_range(self):
        with pytest.raises(ValueError):
            update_belief(np.zeros((2, 1)), np.zeros(2), np.array([1.5, 0.2]))


class TestFilterStep:
    def test_stationary_fixed_point(self):
        seg = build_segment_model(["a"], {"a": ("geometric", 0.05, 1, 50)}, [[1.0]], [1.0])
        model = LabelDynamics("a", np.eye(2)[None], np.zeros(2), np.full(2, 1e-4))
        cfg = FilterConfig(seg, [model], horizon=5)
        state, events = FilterState(), []
        for _ in range(30):
            res = filter_step(state, cfg, [0.4, -0.1])
            state = res.state
            events += res.events
            np.testing.assert_allclose(res.marginal, [1.0])
        np.testing.assert_allclose(res.forecast, np.tile([0.4, -0.1], (5, 1)))
        assert [e.kind for e in events] == [OPENED]

    def test_two_segment_switch(self, reach_data, reach_models):
        from movact import simgen
        from movact.cli import demo_config, reaching_segment_model, reaching_table

        a = reach_data.trajectories["I->A"][91].samples
        b = reach_data.trajectories["A->B"][93].samples
        b = simgen.min_jerk_profile(a[-1], b[-1], 251)
        x = np.vstack([a, b])
        models = [reach_models[lab] for lab in simgen.LABELS]
        cfg = demo_config(models, reaching_segment_model(), reaching_table(), horizon=0)
        tl = run_online(x, cfg)
        closed = [e for e in tl.events if e.kind == CLOSED]
        assert closed and closed[0].label == "I->A"
        assert 0 <= closed[0].t - 251 <= 10
        assert abs(closed[0].end - 251) <= 3
        assert tl.intervals[-1].label == "A->B"

    def test_warmup_uniform_likelihood(self):
        seg = build_segment_model(["a", "b"], {k: ("geometric", 0.1, 1, 10) for k in "ab"})
        models = [LabelDynamics(k, np.zeros((3, 1, 1)), np.array([v]), np.ones(1)) for k, v in (("a", 0.0), ("b", 5.0))]
        cfg = FilterConfig(seg, models, horizon=0)
        state = FilterState()
        for x in ([5.0], [5.0], [5.0]):
            res = filter_step(state, cfg, x)
            state = res.state
            np.testing.assert_allclose(res.marginal, [0.5, 0.5])
        res = filter_step(state, cfg, [5.0])
        assert res.marginal[1] > 0.99

    def test_fallback_on_degenerate_gate(self, caplog):
        seg = build_segment_model(["a", "b"], {k: ("geometric", 0.1, 1, 10) for k in "ab"})
        gate = FixedGate(np.zeros((3, 2)))
        cfg = FilterConfig(seg, dummy_models(seg.labels), gate=gate, horizon=0)
        with caplog.at_level(logging.WARNING):
            res = filter_step(FilterState(), cfg, [0.0])
        np.testing.assert_allclose(res.marginal, [0.5, 0.5])
        assert "ungated" in caplog.text
        cfg.fallback = False
        with pytest.raises(DegenerateBeliefError):
            filter_step(FilterState(), cfg, [0.0])

    def test_all_ones_gate_is_transparent(self, rng):
        seg, ll = random_instance(rng, T=10, L=3, D=5)
        free = run_loglik(seg, ll)
        for gate in (FixedGate(np.ones((10, 3))), unconstrained, ProductGate(unconstrained, FixedGate(np.ones((10, 3))))):
            np.testing.assert_allclose(run_loglik(seg, ll, gate).marginals, free.marginals, atol=1e-15)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 10_000), st.integers(0, 2))
    def test_gate_monotonicity(self, seed, label):
        rng = np.random.default_rng(seed)
        seg, ll = random_instance(rng, T=8, L=3, D=4, d_min=1)
        g = rng.uniform(0.2, 1.0, size=(8, 3))
        base = run_loglik(seg, ll, FixedGate(g))
        step = int(rng.integers(0, 8))
        g2 = g.copy()
        g2[step, label] = 0.0
        cut = run_loglik(seg, ll, FixedGate(g2))
        assert cut.marginals[step, label] == 0.0
        assert cut.marginals[step, label] <= base.marginals[step, label]

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 10_000), st.floats(-50, 50))
    def test_likelihood_scale_invariance(self, seed, shift):
        rng = np.random.default_rng(seed)
        seg, ll = random_instance(rng, T=8, L=3, D=4, d_min=1)
        step = int(rng.integers(0, 8))
        ll2 = ll.copy()
        ll2[step] += shift
        a = run_loglik(seg, ll).final.alpha
        b = run_loglik(seg, ll2).final.alpha
        np.testing.assert_allclose(a, b, atol=1e-12)

    def test_short_stream(self):
        seg = build_segment_model(["a"], {"a": ("geometric", 0.1, 1, 10)})
        cfg = FilterConfig(seg, [LabelDynamics("a", np.zeros((3, 1, 1)), np.zeros(1), np.ones(1))], horizon=4)
        tl = run_online(np.zeros((2, 1)), cfg)
        assert tl.marginals.shape == (2, 1) and tl.forecasts == {}
        tl0 = run_online(np.zeros((0, 1)), cfg)
        assert tl0.marginals.shape == (0, 1)

    def test_deterministic_and_csv(self, tmp_path, rng):
        seg, ll = random_instance(rng, T=10, L=3, D=5)
        a, b = run_loglik(seg, ll), run_loglik(seg, ll)
        assert np.array_equal(a.marginals, b.marginals) and a.events == b.events
        a.to_csv(tmp_path / "t.csv")
        head = (tmp_path / "t.csv").read_text().splitlines()[0]
        assert head == "t,lstar,alpha_l0,alpha_l1,alpha_l2,event,forecast_rmse_available"

    def test_forecast_sidecar(self, tmp_path):
        seg = build_segment_model(["a"], {"a": ("geometric", 0.1, 1, 10)})
        model = LabelDynamics("a", np.eye(3)[None], np.zeros(3), np.ones(3))
        tl = run_online(np.ones((4, 3)), FilterConfig(seg, [model], horizon=3))
        tl.forecasts_to_csv(tmp_path / "f.csv")
        lines = (tmp_path / "f.csv").read_text().splitlines()
        assert lines[0] == "t,k,q1_hat,q2_hat,q3_hat" and len(lines) == 1 + 4 * 3

    def test_label_mismatch(self):
        seg = build_segment_model(["a"], {"a": ("geometric", 0.1, 1, 10)})
        with pytest.raises(ValueError):
            FilterConfig(seg, dummy_models(["b"]))


class TestOracleAgreement:
    @pytest.mark.parametrize("seed", range(10))
    def test_posterior_with_gate_and_table(self, seed):
        rng = np.random.default_rng(100 + seed)
        seg, ll = random_instance(rng, L=3)
        T = ll.shape[0]
        gate = rng.uniform(0.1, 1.0, size=(T, 3))
        table = CompositionTable.from_pairs(
            {(a, b): {Relation.BEFORE: float(rng.uniform(0.1, 1.0))} for a in seg.labels for b in seg.labels},
            Mode.SOFT)
        got = run_loglik(seg, ll, FixedGate(gate), table).marginals
        want = brute_force_posterior(ll, seg, table, gate)
        np.testing.assert_allclose(got, want, atol=1e-9)

    @pytest.mark.parametrize("seed", range(10))
    def test_map_score(self, seed):
        rng = np.random.default_rng(200 + seed)
        seg, ll = random_instance(rng, L=2)
        segs, score = brute_force_map(ll, seg)
        res = map_segmentation_from_loglik(ll, seg)
        assert res.log_score == pytest.approx(score, abs=1e-9)

    def test_map_t8_two_labels(self, rng):
        seg = build_segment_model(["a", "b"], {k: ("gaussian", 3, 1, 2, 4) for k in "ab"}, [[0.3, 0.7], [0.6, 0.4]])
        ll = rng.normal(size=(8, 2)) * 3
        segs, score = brute_force_map(ll, seg)
        res = map_segmentation_from_loglik(ll, seg)
        assert res.log_score == pytest.approx(score, abs=1e-9)
        assert [(iv.label, iv.start, iv.end) for iv in res.intervals] == segs

    def test_posterior_sums_to_one(self, rng):
        seg, ll = random_instance(rng, T=9, L=3)
        np.testing.assert_allclose(brute_force_posterior(ll, seg).sum(axis=1), 1.0, atol=1e-12)

    def test_single_label_hand_scored(self):
        # T = 5 with durations {2, 3}: candidate tilings are (2,3) and (3,2)
        seg = SegmentModel(("a",), [[1.0]], [[0.0, 0.3, 0.7]], [1.0])
        ll = np.zeros((5, 1))
        segs, score = brute_force_map(ll, seg)
        assert score == pytest.approx(np.log(0.3 * 0.7), abs=1e-12)
        assert segs in ([("a", 1, 2), ("a", 3, 5)], [("a", 1, 3), ("a", 4, 5)])
        res = map_segmentation_from_loglik(ll, seg)
        assert res.log_score == pytest.approx(score, abs=1e-12)

    def test_guard(self):
        seg = SegmentModel(("a",), [[1.0]], [[1.0]], [1.0])
        with pytest.raises(InstanceTooLargeError):
            brute_force_posterior(np.zeros((13, 1)), seg)
        seg4 = SegmentModel(tuple("abcd"), np.full((4, 4), 0.25), np.ones((4, 1)), np.full(4, 0.25))
        with pytest.raises(InstanceTooLargeError):
            brute_force_map(np.zeros((3, 4)), seg4)

    def test_tiling_count(self):
        # compositions of 5 into parts <= 3, each part labelled in 2 ways
        assert sum(1 for _ in tilings(5, 2, 3)) == sum(
            2 ** len(c) for c in [(1, 1, 1, 1, 1), (2, 1, 1, 1), (1, 2, 1, 1), (1, 1, 2, 1), (1, 1, 1, 2),
                                  (2, 2, 1), (2, 1, 2), (1, 2, 2), (3, 1, 1), (1, 3, 1), (1, 1, 3),
                                  (3, 2), (2, 3)])


class TestMapSegmentation:
    def test_forced_single_segment(self, rng):
        seg = SegmentModel(("a", "b"), [[0.0, 1.0], [1.0, 0.0]], [[0, 0.2, 0.2, 0.2, 0.2, 0.2]] * 2, [1.0, 0.0])
        res = map_segmentation_from_loglik(np.zeros((6, 2)), seg)
        assert [(iv.label, iv.start, iv.end) for iv in res.intervals] == [("a", 1, 6)]

    def test_infeasible_table(self):
        seg = SegmentModel(("a", "b"), np.full((2, 2), 0.5), [[0, 0.5, 0.5]] * 2, [0.5, 0.5])
        forbid = CompositionTable(default=Default.NONE)
        with pytest.raises(InfeasibleError):
            map_segmentation_from_loglik(np.zeros((7, 2)), seg, forbid)

    def test_duration_one_rejected(self):
        seg = SegmentModel(("a",), [[1.0]], [[0.5, 0.5]], [1.0])
        with pytest.raises(ValueError):
            map_segmentation_from_loglik(np.zeros((4, 1)), seg)

    @settings(max_examples=20, deadline=None)
    @given(st.integers(0, 10_000))
    def test_output_is_admissible(self, seed):
        rng = np.random.default_rng(seed)
        seg, ll = random_instance(rng, T=30, L=3, D=8)
        pairs = [(a, b) for a in seg.labels for b in seg.labels if rng.random() < 0.6]
        table = CompositionTable.from_pairs({p: [Relation.BEFORE] for p in pairs}, default=Default.NONE)
        try:
            res = map_segmentation_from_loglik(ll, seg, table)
        except InfeasibleError:
            return
        cfg = Configuration(0, res.intervals)
        assert check_configuration(cfg, table, CONSECUTIVE).score > 0
        assert res.intervals[0].start == 1 and res.intervals[-1].end == 30
        for x, y in zip(res.intervals, res.intervals[1:]):
            assert y.start == x.end + 1

    def test_two_segment_stream(self, reach_data, reach_models):
        from movact import simgen
        from movact.cli import reaching_segment_model, reaching_table

        a = reach_data.trajectories["I->B"][90].samples
        b = simgen.min_jerk_profile(a[-1], reach_data.trajectories["B->C"][90].samples[-1], 251)
        models = [reach_models[lab] for lab in simgen.LABELS]
        res = map_segmentation(np.vstack([a, b]), reaching_segment_model(), models, reaching_table())
        assert [iv.label for iv in res.intervals] == ["I->B", "B->C"]
        assert abs(res.intervals[0].end - 251) <= 2

    def test_stream_loglik_warmup(self):
        models = [LabelDynamics("a", np.zeros((3, 1, 1)), np.zeros(1), np.ones(1)),
                  LabelDynamics("b", np.zeros((1, 1, 1)), np.zeros(1), np.ones(1))]
        ll = stream_log_likelihoods(models, np.ones((6, 1)))
        assert ll.shape == (6, 2)
        assert np.all(ll[:3] == 0) and np.all(ll[3:] != 0)


class TestAllenGate:
    def test_cells_scored_by_group(self):
        labels = ("x", "y", "z")
        table = CompositionTable.from_pairs({("x", "y"): [Relation.BEFORE], ("y", "z"): [Relation.BEFORE]},
                                            default=Default.NONE)
        from movact.allen import ActionInterval
        state = FilterState(t=9, open_label=1, open_start=6, closed=(ActionInterval("x", 1, 5),))
        g = AllenGate(labels, table, d_max=6)(state, 10)
        # k = 4 cells started after step 6 must follow y; older cells must follow x
        np.testing.assert_array_equal(g[:, :4], [[0] * 4, [0] * 4, [1] * 4])
        np.testing.assert_array_equal(g[:, 4:], [[0, 0], [1, 1], [0, 0]])

    def test_guard_extends_open_group(self):
        table = CompositionTable.from_pairs({("x", "y"): [Relation.BEFORE]}, default=Default.NONE)
        state = FilterState(t=9, open_label=0, open_start=6, closed=())
        g = AllenGate(("x", "y"), table, d_max=6, guard=2)(state, 10)
        np.testing.assert_array_equal(g[:, 2:], 1.0)
        np.testing.assert_array_equal(g[:, :2], [[0, 0], [1, 1]])

    def test_no_open_segment(self):
        g = AllenGate(("x",), CompositionTable(default=Default.NONE), 3)(FilterState(), 1)
        np.testing.assert_array_equal(g, 1.0)
