import pytest

from wikiguard.errors import DuplicateFeedbackError, UnknownEventError
from wikiguard.events import ScenarioConfig, build_scenario, order_stream
from wikiguard.pipeline import (
    PipelineConfig,
    QuantileStore,
    StreamPipeline,
    full_feature_layout,
    probe_feature_ids,
)
from wikiguard.synth import generate_events


@pytest.fixture(scope="module")
def small_stream():
    events = order_stream(generate_events(120, seed=8))
    return events


def gnb_pipeline(**overrides):
    config = PipelineConfig(model_id="gnb", **overrides)
    return StreamPipeline(config)


class TestFeaturize:
    def test_census_is_5_4_80(self, small_stream):
        pipeline = gnb_pipeline()
        pipeline.engine.ngram_state.per_sentence_cap = 4
        parts = pipeline.engine.featurize(small_stream[0])
        assert parts.census["side_groups"] == 5
        assert parts.census["content_groups"] == 4
        assert parts.census["historical"] == 80
        # 89 engineered feature groups in total, n-grams counted separately
        total = (
            parts.census["side_groups"]
            + parts.census["content_groups"]
            + parts.census["historical"]
        )
        assert total == 89

    def test_base_scalars_has_19_entries(self, small_stream):
        pipeline = gnb_pipeline()
        pipeline.engine.ngram_state.per_sentence_cap = 4
        parts = pipeline.engine.featurize(small_stream[0])
        assert len(parts.base_scalars) == 19

    def test_absent_quality_maps_stay_absent(self, small_stream):
        pipeline = gnb_pipeline()
        pipeline.engine.ngram_state.per_sentence_cap = 4
        event = small_stream[0].model_copy(update={"review_quality": None})
        parts = pipeline.engine.featurize(event)
        assert not any(k.startswith("rq_") for k in parts.vector)

    def test_historical_features_snapshot_before_update(self, small_stream):
        pipeline = gnb_pipeline()
        pipeline.engine.ngram_state.per_sentence_cap = 4
        event = small_stream[0]
        parts = pipeline.engine.featurize(event)
        assert parts.vector["user_post_count"] == 0.0
        later = event.model_copy(update={"event_id": "again"})
        parts2 = pipeline.engine.featurize(later)
        assert parts2.vector["user_post_count"] == 1.0

    def test_embedding_dims_included(self, small_stream):
        pipeline = gnb_pipeline()
        pipeline.engine.ngram_state.per_sentence_cap = 4
        parts = pipeline.engine.featurize(small_stream[0])
        emb = [k for k in parts.vector if k.startswith("emb_")]
        assert len(emb) == 300

    def test_layout_names_disjoint(self):
        layout = full_feature_layout()
        seen = set()
        for group in layout.values():
            assert not (seen & set(group))
            seen.update(group)
        assert len(layout["historical"]) == 80


class TestProbeFeatures:
    def test_quality_probe(self):
        ids = {"aq_ok", "eq_damaging_true", "rq_a", "n_chars", "ng_cat"}
        assert probe_feature_ids(ids, "quality") == {"aq_ok", "eq_damaging_true", "rq_a"}

    def test_all_probe(self):
        ids = {"a", "b"}
        assert probe_feature_ids(ids, "all") == ids


class TestCalibrateAndProcess:
    def test_calibration_report(self, small_stream):
        pipeline = gnb_pipeline()
        report = pipeline.calibrate(small_stream[:30])
        assert pipeline.calibrated
        assert report["cold_samples"] == 30
        assert report["ngram_cap"] >= 1
        assert report["threshold"] > 0
        assert all(p.startswith(("aq_", "eq_", "rq_")) for p in report["probe_features"])

    def test_process_only_selected_reach_model(self, small_stream):
        pipeline = gnb_pipeline()
        pipeline.calibrate(small_stream[:30])
        result = pipeline.process(small_stream[30])
        threshold = pipeline.selector.threshold
        for feature in result.selected:
            assert pipeline.selector.tracker.variance(feature) >= threshold
        assert set(result.selected) <= set(result.vector)

    def test_grid_search_sets_model_params(self, small_stream):
        config = PipelineConfig(model_id="alma")
        pipeline = StreamPipeline(config)
        report = pipeline.calibrate(small_stream[:40], grid_search=True)
        assert set(report["grid_best"]) == {"alpha", "b", "c"}
        assert pipeline.model_params == report["grid_best"]

    def test_checkpoint_resume_identical(self, tmp_path, small_stream):
        pipeline = gnb_pipeline()
        pipeline.calibrate(small_stream[:30])
        for event in small_stream[30:60]:
            result = pipeline.process(event)
            pipeline.learn(result.selected, event.label)
        path = tmp_path / "ck.pkl"
        pipeline.save(path)
        resumed = StreamPipeline.load(path)
        for event in small_stream[60:90]:
            a = pipeline.process(event)
            b = resumed.process(event)
            assert (a.predicted, a.proba) == (b.predicted, b.proba)
            pipeline.learn(a.selected, event.label)
            resumed.learn(b.selected, event.label)


class TestLiveMode:
    def test_cold_start_then_learning(self, small_stream):
        pipeline = gnb_pipeline(live_cold_start_n=20)
        for event in small_stream[:19]:
            pipeline.handle_live(event)
        assert not pipeline.calibrated
        pipeline.handle_live(small_stream[19])
        assert pipeline.calibrated

    def test_regressive_timestamp_clamped(self, small_stream):
        pipeline = gnb_pipeline(live_cold_start_n=5)
        later = small_stream[10]
        earlier = small_stream[0].model_copy(update={"event_id": "late-arrival"})
        pipeline.handle_live(later)
        admitted = pipeline.admit_event(earlier)
        assert admitted.epoch >= later.epoch

    def test_replay_determinism(self, small_stream):
        runs = []
        for _ in range(2):
            pipeline = gnb_pipeline(live_cold_start_n=15)
            outputs = [pipeline.handle_live(e) for e in small_stream]
            runs.append([(r.predicted, r.proba[1]) for r in outputs])
        assert runs[0] == runs[1]


class TestFeedback:
    def make_trained(self, small_stream):
        pipeline = gnb_pipeline()
        pipeline.calibrate(small_stream[:30])
        for event in small_stream[30:80]:
            result = pipeline.process(event)
            pipeline.learn(result.selected, event.label)
        return pipeline

    def test_feedback_shifts_posterior_toward_expert_label(self, small_stream):
        pipeline = self.make_trained(small_stream)
        probe = small_stream[80]
        result = pipeline.process(probe)
        before = pipeline.model.predict_proba_one(result.selected)
        # correct in the direction the model currently disfavors
        expert_label = 0 if before[1] >= 0.5 else 1
        record = pipeline.record_feedback(probe.event_id, expert_label=expert_label)
        assert record.applied
        after = pipeline.model.predict_proba_one(result.selected)
        assert after[expert_label] >= before[expert_label]
        assert after != before

    def test_duplicate_feedback_conflicts(self, small_stream):
        pipeline = self.make_trained(small_stream)
        probe = small_stream[80]
        pipeline.process(probe)
        pipeline.record_feedback(probe.event_id, 1)
        with pytest.raises(DuplicateFeedbackError):
            pipeline.record_feedback(probe.event_id, 0)

    def test_unknown_event_rejected(self, small_stream):
        pipeline = self.make_trained(small_stream)
        with pytest.raises(UnknownEventError):
            pipeline.record_feedback("nope", 1)

    def test_feedback_count_conservation(self, small_stream):
        pipeline = self.make_trained(small_stream)
        applied = 0
        for event in small_stream[80:90]:
            pipeline.process(event)
            pipeline.record_feedback(event.event_id, 1)
            applied += 1
        assert pipeline.applied_feedback_count == applied
        assert len(pipeline.feedback_log) == applied

    def test_spam_history_updated_on_label_one(self, small_stream):
        pipeline = self.make_trained(small_stream)
        event = small_stream[85].model_copy(update={"revert_flag": False})
        pipeline.process(event)
        before = pipeline.engine.history.user(event.user_id).spam_count
        pipeline.record_feedback(event.event_id, 1)
        assert pipeline.engine.history.user(event.user_id).spam_count == before + 1


class TestQuantileStore:
    def test_quartiles_linear_interpolation(self):
        store = QuantileStore()
        for i in range(1, 101):
            store.add_vector({"f": float(i)})
        q1, q2, q3 = store.quartiles("f")
        assert q1 == pytest.approx(25.75)
        assert q2 == pytest.approx(50.5)
        assert q3 == pytest.approx(75.25)

    def test_unknown_feature(self):
        assert QuantileStore().quartiles("missing") is None


class TestEndToEnd:
    def test_scenario_run_accuracy_above_chance(self, small_stream):
        events = order_stream(generate_events(800, seed=4))
        cfg = ScenarioConfig(scenario=2, s=min(
            sum(1 for e in events if e.label == 0), sum(1 for e in events if e.label == 1)
        ), rng_seed=2)
        stream = build_scenario(events, cfg)
        pipeline = gnb_pipeline(keep_records=False, track_quantiles=False)
        pipeline.calibrate(stream[:20])
        from wikiguard.evaluation import run_prequential

        run = run_prequential(pipeline, stream[20:], cfg, model_id="gnb")
        assert run.curve[-1].accuracy > 0.6
