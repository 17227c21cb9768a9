import json
import math

import numpy as np
import pytest

import dirpart


def test_interval_closed_forms():
    d = dirpart.interval_dirichlet(3)
    assert d["objective"] == pytest.approx(27 * math.pi**2, rel=1e-14)
    z = dirpart.interval_zaremba(3)
    assert z["lengths"][1] / z["lengths"][0] == pytest.approx(4 ** (1 / 3), rel=1e-12)
    assert sum(z["lengths"]) == pytest.approx(1.0)


def test_sample_is_deterministic():
    a, ma = dirpart.sample("square", 200, seed=3, margin=0.3)
    b, mb = dirpart.sample("square", 200, seed=3, margin=0.3)
    assert a.shape == (200, 2)
    np.testing.assert_array_equal(a, b)
    np.testing.assert_array_equal(ma, mb)
    inside = (a >= 0).all(axis=1) & (a <= 1).all(axis=1)
    np.testing.assert_array_equal(ma, inside)


def test_partition_interval():
    x, mask = dirpart.sample("interval", 300, seed=1, margin=0.3)
    r = dirpart.partition(x, mask, kernel="ball", eps=3 * 300**-0.5, k=2, restarts=3, seed=1)
    labels = np.array(r["labels"])
    assert set(labels[mask]) == {0, 1}
    assert (labels[~mask] == -1).all()
    assert r["objective"] == pytest.approx(sum(r["eigenvalues"]))


def test_tl2_small_example():
    x = np.array([[0.0], [1.0]])
    y = np.array([[3.0], [4.0]])
    f = np.zeros(2)
    d, approx = dirpart.tl2(x, f, y, f)
    assert d == pytest.approx(3.0)
    assert not approx
    self_d, _ = dirpart.tl2(x, f, x, f)
    assert self_d == 0.0


def test_surface_tension_and_hausdorff():
    assert dirpart.surface_tension("exp", 2) == pytest.approx(6 * math.pi)
    a = np.array([[0.0, 0.0]])
    b = np.array([[3.0, 4.0]])
    assert dirpart.hausdorff(a, b) == pytest.approx(5.0)


def test_config_errors_raise():
    with pytest.raises(dirpart.ConfigError):
        dirpart.normalize_config(json.dumps({"restart": 3}))
    with pytest.raises(dirpart.InputError):
        dirpart.tl2(np.zeros((2, 1)), np.zeros(3), np.zeros((2, 1)), np.zeros(2))


def test_run_sweep_csv():
    cfg = {"name": "py", "domain": {"type": "interval"}, "kernel": "ball",
           "epsilon": {"c": 3, "alpha": 0.5}, "n": [150], "k": 2, "restarts": 2, "seeds": [0]}
    csv = dirpart.run_sweep(json.dumps(cfg))
    lines = csv.strip().splitlines()
    assert lines[0].startswith("n,seed,objective")
    assert len(lines) == 2
