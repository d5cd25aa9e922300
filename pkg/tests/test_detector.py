import numpy as np
import pytest

from algorithms.mlp import init_model, zero_model
from detectors import Detector, DetectorError, MppsDetector, MppsIdealDetector, mpps_llrs
from detectors.mpps_detector import mpps_features
from entity.channel import ChannelModelConfig, draw_channel, transmit
from entity.constellation import build_constellation, modulate
from entity.trial import TrialContext


@pytest.fixture
def ctx(rng) -> TrialContext:
    c = build_constellation(4)
    h = draw_channel(ChannelModelConfig(), 2, 2, rng)
    y = transmit(h, modulate(rng.integers(0, 2, 8), c, 2), 1.0, rng)
    return TrialContext(y, h, 1.0, c, 60.0, 0.25)


def test_registry_contains_every_detector():
    assert {"exact_log_map", "exact_max_log", "ml", "candidate_max_log", "candidate_log_map", "lmmse", "mpps",
        "mpps_ideal"} <= set(Detector.detectors)


def test_get_instance_labels():
    model = zero_model(4, 4)
    assert Detector.get_instance("mpps(8)", model).label == "mpps(8)"
    assert Detector.get_instance("mpps", model, k_budget=16).label == "mpps(16)"
    assert Detector.get_instance(" Candidate_Max_Log ( 3 ) ").label == "candidate_max_log(3)"
    assert Detector.get_instance("lmmse").label == "lmmse"
    assert repr(Detector.get_instance("ml")) == "MlDetector(ml)"


@pytest.mark.parametrize("spec", ["viterbi", "lmmse(4)", "mpps(8)", "candidate_log_map(0)", "mpps(", "mpps_ideal"])
def test_get_instance_rejects(spec):
    with pytest.raises(ValueError):
        Detector.get_instance(spec)


def test_get_instance_rejects_with_detector_error():
    with pytest.raises(DetectorError):
        Detector.get_instance("mpps")


def test_candidate_detectors_share_paths(ctx):
    max_log = Detector.get_instance("candidate_max_log(6)")
    log_map = Detector.get_instance("candidate_log_map(6)")
    mpps = Detector.get_instance("mpps(6)", zero_model(4, 4))
    assert max_log.candidate_hash(ctx) == log_map.candidate_hash(ctx) == mpps.candidate_hash(ctx)
    assert Detector.get_instance("candidate_max_log(7)").candidate_hash(ctx) != max_log.candidate_hash(ctx)
    assert Detector.get_instance("lmmse").candidate_hash(ctx) is None


def test_every_detector_emits_full_vector(ctx):
    model = init_model(8, 4, np.random.default_rng(3), 60.0)
    for spec in ("exact_log_map", "exact_max_log", "ml", "candidate_max_log(4)", "candidate_log_map(4)",
            "lmmse", "mpps(4)", "mpps_ideal"):
        llr = Detector.get_instance(spec, model).detect(ctx)
        assert len(llr) == 8
        assert np.all(np.abs(llr.llr) <= 1e6)


def test_zero_model_outputs_zero(ctx):
    model = zero_model(8, 4)
    assert np.array_equal(MppsDetector(4, model).detect(ctx).llr, np.zeros(8))
    assert np.array_equal(MppsIdealDetector(0, model).detect(ctx).llr, np.zeros(8))


def test_ideal_budget(ctx):
    ideal = MppsIdealDetector(0, zero_model(8, 4))
    assert ideal.path_budget(4) == 17
    assert ideal.path_budget(1) == 5
    assert ideal.candidate_hash(ctx) is None
    assert MppsDetector(12, zero_model(8, 4)).path_budget(4) == 12


def test_features_layout(ctx):
    features = mpps_features(ctx.layer_metrics(8), ctx.c, 0.5, 0.25)
    assert features.shape == (2, 7)
    assert np.all(features[:, 6] == 0.5)
    assert np.all(features[:, 2:4] > 0)
    assert np.all((features[:, 4:6] >= 0) & (features[:, 4:6] <= 1))


def test_model_constellation_mismatch(ctx):
    with pytest.raises(ValueError):
        mpps_llrs(zero_model(8, 6), ctx.layer_metrics(4), ctx.c, 1.0, 0.25)
