import math
import os
from math import comb
from pathlib import Path

import pytest

import gmfs

CONFIG_DIR = Path(os.environ.get("GMFS_TEST_CONFIG_DIR", Path(__file__).resolve().parents[2] / "configs"))

SMALL = """
[experiment]
n = 7
[train]
kappa_list = 1, 2
iterations = 30
samples = 10
[execute]
horizon = 10
seeds = 0..3
"""


def test_histogram_counts_and_ranks():
    assert gmfs.histogram_count(3, 24) == comb(26, 2) == 325
    assert gmfs.rank([2, 0]) == 0
    assert gmfs.rank([0, 2]) == 2
    for idx in range(gmfs.histogram_count(3, 4)):
        counts = gmfs.unrank(3, 4, idx)
        assert sum(counts) == 4
        assert gmfs.rank(counts) == idx


def test_warehouse_examples():
    env = gmfs.WarehouseEnv()
    assert env.reward_bound == 20.0
    assert env.reward(2, 2, [1.0, 0.0, 0.0]) == 15.0
    assert env.reward(2, 2, [0.0, 0.0, 1.0]) == pytest.approx(3.0)
    p = env.step_distribution(0, 2, [1.0, 0.0, 0.0])
    assert p == pytest.approx([0.0, 0.1, 0.9])
    with pytest.raises(gmfs.DomainError):
        env.step_distribution(5, 0, [1.0, 0.0, 0.0])


def test_sample_budget():
    assert gmfs.sample_budget(1, 0.5, 1.0, 1, 1) == 530


def test_config_round_trip_and_errors():
    cfg = gmfs.Config.from_text(SMALL)
    assert cfg.n == 7
    assert cfg.kappa_list == [1, 2]
    again = gmfs.Config.from_text(cfg.serialize())
    assert again.hash == cfg.hash
    assert len(cfg.hash) == 16
    with pytest.raises(gmfs.ConfigError):
        gmfs.Config.from_text("[train]\nkappa_list = 50\n")
    defaults = gmfs.Config()
    assert defaults.gamma == 0.95
    assert defaults.kappa_list == [1, 3, 6, 9, 12, 15, 18, 21, 24]


def test_load_shipped_config():
    cfg = gmfs.Config.load(str(CONFIG_DIR / "smoke.ini"))
    assert cfg.n == 9


def test_train_evaluate_save_load(tmp_path):
    cfg = gmfs.Config.from_text(SMALL)
    q = gmfs.train(cfg, 2)
    assert q.kappa == 2
    assert q.mode == "marginal"
    assert q.size == 9 * comb(4, 2)
    assert q.sweeps == len(q.residuals)
    assert q.sup_norm <= 20.0 / 0.05 + 1e-9
    result = gmfs.evaluate(cfg, q)
    assert len(result["returns"]) == 3
    assert result["mean"] == pytest.approx(sum(result["returns"]) / 3)
    path = tmp_path / "q.bin"
    q.save(str(path))
    loaded = gmfs.load_qtable(str(path))
    assert loaded.values() == q.values()
    assert loaded(0, 0, 0) == q(0, 0, 0)
    assert gmfs.evaluate(cfg, loaded)["returns"] == result["returns"]
    path.write_bytes(path.read_bytes()[:-3])
    with pytest.raises(gmfs.FormatError):
        gmfs.load_qtable(str(path))


def test_sweep_rows():
    rows = gmfs.sweep(gmfs.Config.from_text(SMALL))
    assert [r["kappa"] for r in rows] == [1, 2]
    for r in rows:
        assert r["status"] == "ok"
        assert r["table_size"] == 9 * comb(r["kappa"] + 2, 2)
        assert math.isfinite(r["mean_return"])
