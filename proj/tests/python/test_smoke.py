import math

import pytest

import jocot


def test_remember_rate():
    assert jocot.remember_rate(0, 10, 0.4) == 1.0
    assert jocot.remember_rate(5, 10, 0.5) == 0.75
    assert jocot.remember_rate(300, 10, 0.4) == 0.6
    with pytest.raises(ValueError):
        jocot.remember_rate(-1, 10, 0.4)


def test_losses():
    assert jocot.per_sample_ce([1.0 / 12] * 12, 3) == pytest.approx(math.log(12))
    assert jocot.symmetric_kl([0.9, 0.1], [0.1, 0.9]) == pytest.approx(1.6 * math.log(9))
    p = [0.2, 0.3, 0.5]
    assert jocot.jocor_per_sample_loss(p, p, 2, 1.0) == 0.0
    with pytest.raises(ValueError):
        jocot.per_sample_ce(p, 3)


def test_noise_matrix_and_injection():
    rows = jocot.build_noise_matrix("pairflip", 0.45, 3)
    assert rows[0] == pytest.approx([0.55, 0.45, 0.0])
    assert rows[2] == pytest.approx([0.45, 0.0, 0.55])
    labels = [i % 12 for i in range(11520)]
    noisy, flipped = jocot.inject_noise(labels, "symmetric", 0.4, 12, 7)
    assert len(noisy) == len(labels)
    assert abs(sum(flipped) / len(labels) - 0.4) <= 0.015
    assert all((a != b) == f for a, b, f in zip(labels, noisy, flipped))


def test_selection_and_consensus():
    assert jocot.small_loss_select([0.1, 5.0, 0.2, 3.0], 0.5) == [0, 2]
    assert jocot.small_loss_select([0.1, 5.0], 0.5, indices=[40, 41]) == [40]
    assert jocot.consensus([1, 2, 3], [2, 3], [2, 3, 4], [2, 4]) == [2]
    with pytest.raises(ValueError):
        jocot.small_loss_select([], 0.5)


def test_run_experiment(tmp_path):
    csv = tmp_path / "data.csv"
    jocot.synthesize_csv(str(csv), classes=3, per_class=20, dim=51, separation=4.0, seed=1)
    config = f"""
[data]
path = {csv}
[experiment]
methods = jocot, ce_baseline
rates = 0.2
seeds = 1
[train]
epochs = 3
decay_start_epoch = 1
hidden = 16
batch_size = 16
"""
    result = jocot.run_experiment(config, str(tmp_path / "out"))
    assert result["version"] == jocot.__version__
    assert len(result["cells"]) == 2
    assert all(c["error"] is None for c in result["cells"])
    assert (tmp_path / "out" / "summary.csv").read_text().startswith("method,noise_kind,rate,seed,test_acc")
    with pytest.raises(ValueError):
        jocot.run_experiment("[train]\nbogus = 1\n")
