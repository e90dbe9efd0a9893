import math
import os
import subprocess

import pytest

import qav


def test_formula_with_reference_constants():
    p = qav.REFERENCE_PARAMS_100
    assert qav.weight(0.2, p) == pytest.approx(-0.0522428, abs=1e-12)
    assert qav.qa_score(0.2, 20.0, 35.0, p) == pytest.approx(-0.844856, abs=1e-12)
    assert qav.weight(0.9, p) == 0.0
    assert qav.scaled_score(-0.05, 0.3, 20.0) == pytest.approx(0.331812, abs=1e-6)


def test_embedding_basics():
    direction, quality = qav.decompose([3.0, 4.0])
    assert quality == 5.0
    assert direction == pytest.approx([0.6, 0.8])
    assert qav.cosine([1.0, 0.0], [2.0, 0.0]) == pytest.approx(1.0)
    with pytest.raises(qav.QavError) as err:
        qav.decompose([0.0, 0.0])
    assert err.value.args[1] == "ZeroNorm"


def test_metrics():
    gen, imp = [0.8, 0.9, 0.95], [0.1, 0.2, 0.3]
    assert qav.eer(gen, imp)[0] == 0.0
    assert qav.roc_auc(gen, imp) == 1.0
    assert qav.fmr_at(0.2, gen, imp) == pytest.approx(2 / 3)
    assert qav.threshold_at_fmr(0.5, gen, imp) == 0.3


def test_fit_and_aggregate():
    p = qav.fit_linear([(0.0, 0.0), (1.0, 1.0)])
    assert (p.alpha, p.beta) == (0.0, 1.0)
    direction, quality = qav.aggregate([[0.0, 10.0], [0.0, 30.0]])
    assert quality == 25.0
    assert direction == [0.0, 1.0]


def test_planted_calibration_end_to_end(tmp_path):
    cfg = qav.SynthConfig.planted(1)
    cfg.n_subjects = 30
    cfg.samples_per_subject = 8
    samples = qav.generate(cfg)
    assert len(samples) == 240
    path = str(tmp_path / "e.qmef")
    qav.save_embeddings(path, samples)
    loaded = qav.load_embeddings(path)
    assert [e.sample_id for e in loaded] == [e.sample_id for e in samples]

    cset = qav.build_comparison_set(samples, qav.all_pairs(samples))
    assert cset.genuine_count == 30 * 28
    config = qav.CalibConfig()
    config.fmr_min = 1e-4
    result = qav.calibrate(cset, config)
    assert len(result.points) == 40
    assert result.params.beta > 0
    assert 0.0 <= result.fit_r2 <= 1.0

    cal = str(tmp_path / "cal.txt")
    qav.save_calibration(cal, result)
    assert qav.load_calibration(cal) == result

    qa = qav.qa_scores(cset.scores, cset.q_min, result.params)
    assert all(q <= s for q, s in zip(qa, cset.scores))


def test_insufficient_imposters():
    cset = qav.ComparisonSet([0.9, 0.8] + [0.1] * 10, [20.0] * 12, [True, True] + [False] * 10)
    with pytest.raises(qav.QavError) as err:
        qav.calibrate(cset, qav.CalibConfig())
    assert err.value.args[1] == "InsufficientImposters"


@pytest.mark.skipif(not os.environ.get("QAV_CLI"), reason="CLI path not provided")
def test_cli_synth(tmp_path):
    out = tmp_path / "synth"
    run = subprocess.run([os.environ["QAV_CLI"], "synth", "--seed", "7", "--subjects", "5", "--per-subject", "3",
                          "--out", str(out)], capture_output=True, text=True)
    assert run.returncode == 0, run.stderr
    assert len(qav.load_embeddings(str(out / "embeddings.txt"))) == 15
    bad = subprocess.run([os.environ["QAV_CLI"], "synth", "--per-subject", "0", "--out", str(out)],
                         capture_output=True, text=True)
    assert bad.returncode == 2
    assert "--per-subject" in bad.stderr
