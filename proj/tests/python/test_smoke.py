"""Smoke tests for the python bindings."""

import math

import numpy as np
import pytest

import owadd


def make_config(**overrides):
    config = owadd.StreamConfig()
    config.n_chunks = 8
    config.chunk_size = 60
    config.n_features = 6
    config.n_drifts = 1
    config.n_novelties = 1
    config.novel_proportion = 0.2
    config.class_separation = 3.0
    config.seed = 7
    for key, value in overrides.items():
        setattr(config, key, value)
    return config


def small_detector_config(seed=0):
    config = owadd.DetectorConfig()
    config.epochs = 30
    config.buffer_capacity = 180
    config.hidden_widths = [4]
    config.seed = seed
    return config


def test_version():
    assert owadd.__version__


def test_t_test_hand_example():
    result = owadd.one_sided_t_test([1, 2, 3, 4, 5], [2, 3, 4, 5, 6])
    assert result.t_statistic == pytest.approx(-1.0)
    assert result.degrees_of_freedom == pytest.approx(8.0)
    assert result.p_value == pytest.approx(0.173, abs=5e-4)


def test_student_t_cdf():
    assert owadd.student_t_cdf(0.0, 5.0) == 0.5
    assert owadd.student_t_cdf(1.0, 10.0) == pytest.approx(0.82955, abs=1e-5)


def test_kde_two_point_example():
    model = owadd.kde_fit([0.0, 0.0, 2.0, 2.0])
    assert not model.degenerate
    scores = owadd.kde_score(model, [1.0])
    assert scores[0] > 0.0

    degenerate = owadd.kde_fit([5.0])
    assert degenerate.degenerate
    assert degenerate.bandwidth == pytest.approx(1e-6)


def test_ks_two_sample():
    stat, p = owadd.ks_two_sample([1.0, 2.0, 3.0], [4.0, 5.0, 6.0])
    assert stat == 1.0
    stat, p = owadd.ks_two_sample([1.0, 2.0, 3.0], [1.0, 2.0, 3.0])
    assert stat == 0.0
    assert p == 1.0


def test_subsample_without_replacement():
    values = list(range(100))
    drawn = owadd.subsample([float(v) for v in values], 30, seed=4)
    assert len(drawn) == 30
    assert len(set(drawn)) == 30


def test_autoencoder_roundtrip():
    model = owadd.Autoencoder(6, [3], seed=1)
    assert model.layer_widths() == [6, 3, 6]

    rng = np.random.default_rng(0)
    chunk = rng.normal(size=(80, 6))
    before = np.mean(model.reconstruction_errors(chunk))
    config = owadd.TrainConfig()
    config.epochs = 40
    model.train(chunk, config)
    after = np.mean(model.reconstruction_errors(chunk))
    assert after < before

    clone = model.clone()
    probe = rng.normal(size=(10, 6))
    assert np.allclose(clone.reconstruction_errors(probe),
                       model.reconstruction_errors(probe))


def test_stream_generation_deterministic():
    config = make_config()
    a = owadd.generate_stream(config)
    b = owadd.generate_stream(config)
    assert len(a.chunks) == config.n_chunks
    assert a.chunks[0].shape == (60, 6)
    assert np.array_equal(a.chunks[3], b.chunks[3])
    assert a.truth.class_ids == b.truth.class_ids
    assert len(a.truth.events) == 2


def test_event_schedule_hand_example():
    config = make_config(n_chunks=100, n_drifts=1, n_novelties=5)
    events = owadd.event_schedule(config)
    assert [e.chunk_index for e in events] == [14, 28, 42, 57, 71, 85]
    assert events[0].type == owadd.EventType.novelty
    assert events[1].type == owadd.EventType.drift


def test_detector_end_to_end():
    stream = owadd.generate_stream(make_config(n_drifts=0, n_novelties=0))
    detector = owadd.Detector(stream.chunks[0], small_detector_config())
    assert not detector.initial_verdict().drift
    assert detector.buffer_size == 60

    verdicts = [detector.process_chunk(chunk) for chunk in stream.chunks[1:]]
    assert all(len(v.labels_known) == 60 for v in verdicts)

    # a strong shift after warm-up must fire
    shifted = stream.chunks[-1] + 25.0
    verdict = detector.process_chunk(shifted)
    assert verdict.drift
    assert detector.buffer_size == 0

    labels = detector.recognize_unknown(shifted)
    assert sum(labels) == 0  # all unknown under the far shift


def test_detector_snapshot(tmp_path):
    stream = owadd.generate_stream(make_config())
    detector = owadd.Detector(stream.chunks[0], small_detector_config(3))
    detector.process_chunk(stream.chunks[1])
    path = tmp_path / "state.json"
    detector.save(path)
    resumed = owadd.Detector.load(path)
    v1 = detector.process_chunk(stream.chunks[2])
    v2 = resumed.process_chunk(stream.chunks[2])
    assert v1.drift == v2.drift
    assert v1.labels_known == v2.labels_known


def test_metrics():
    log = owadd.DetectionLog([52, 101, 150], 200)
    assert owadd.d1(log, [50, 100]) == pytest.approx(53.0 / 3.0)
    assert owadd.d2(log, [50, 100]) == pytest.approx(1.5)
    assert owadd.r_measure(log, [50, 100]) == pytest.approx(0.5)

    report = owadd.classification_metrics(
        [[True, True, False]], [[True, False, False]]
    )
    assert report.recall == 1.0
    assert report.specificity == 0.5
    assert report.balanced_accuracy == 0.75


def test_stream_file_roundtrip(tmp_path):
    config = make_config()
    stream = owadd.generate_stream(config)
    path = tmp_path / "s.owst"
    owadd.write_stream(stream, config, path)
    loaded, loaded_config = owadd.read_stream(path)
    assert loaded_config.seed == config.seed
    assert np.array_equal(loaded.chunks[0], stream.chunks[0])
    assert loaded.truth.class_ids == stream.truth.class_ids


def test_baselines():
    rng = np.random.default_rng(1)
    first = rng.normal(size=(200, 5))
    ksdd = owadd.KsddDetector(first, window_size=200, threshold=0.005)
    assert not ksdd.process_chunk(rng.normal(size=(200, 5)))
    assert ksdd.process_chunk(rng.normal(size=(200, 5)) + 5.0)

    blobs = np.vstack([rng.normal(size=(100, 5)) - 4.0, rng.normal(size=(100, 5)) + 4.0])
    centroid = owadd.CentroidNovelty(blobs, n_clusters=2, seed=3)
    labels = centroid.labels(blobs)
    assert sum(labels) >= 0.95 * len(labels)
    far = rng.normal(size=(20, 5)) + 50.0
    assert sum(centroid.labels(far)) == 0
