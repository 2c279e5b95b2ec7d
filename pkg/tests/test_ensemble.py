import csv
import math

import numpy as np
import pytest

from qrecur import EnsembleSpec, decile_band_width, run_ensemble
from qrecur.ensemble import _summarise, nearest_rank, sample_seed, write_samples_csv, write_stats_csv
from qrecur.errors import UndefinedBand

STAR = {"family": "star", "M": 6, "hoppings": "random"}
LOOP = {"family": "loop", "M": 6, "unitary": "cue"}


def transfer(target):
    return {"family": "transfer", "M": 6, "target": target, "unitary": "cue"}


class TestNearestRank:
    def test_deciles(self):
        xs = list(range(1, 11))
        assert nearest_rank(xs, 0.1) == 1
        assert nearest_rank(xs, 0.5) == 5
        assert nearest_rank(xs, 0.9) == 9

    def test_small(self):
        assert nearest_rank([3.0, 7.0], 0.1) == 3.0
        assert nearest_rank([3.0, 7.0], 0.9) == 7.0

    def test_rank_rule(self):
        xs = np.arange(2000.0)
        assert nearest_rank(xs, 0.1) == xs[199]


class TestSpec:
    def test_needs_two_samples(self):
        with pytest.raises(ValueError):
            EnsembleSpec(STAR, 1, 0)

    def test_seed_derivation(self):
        a = sample_seed(5, 1, 2).generate_state(2)
        b = np.random.SeedSequence(entropy=5, spawn_key=(1, 2)).generate_state(2)
        assert np.array_equal(a, b)
        assert not np.array_equal(a, sample_seed(5, 2, 1).generate_state(2))


class TestRunEnsemble:
    def test_loop_quantized(self):
        spec = EnsembleSpec(LOOP, 20, 3, "d", (0.2, 0.8))
        stats = run_ensemble(spec)
        for d in (0.2, 0.8):
            p = stats.point(d)
            assert abs(p.median - 6) < 1e-6 and abs(p.lower_decile - 6) < 1e-6
            assert abs(p.upper_decile - 6) < 1e-6
            assert decile_band_width(stats, d) < 1e-6

    def test_samplewise_quantization(self):
        stats = run_ensemble(EnsembleSpec(STAR, 15, 1, "d", (0.0, 0.4)))
        for r in stats.samples:
            assert r.psi_unital
            assert abs(r.values[0] - r.relevant_dim) < 1e-6

    def test_deterministic(self):
        spec = EnsembleSpec(transfer(5), 10, 7, "d", (0.3, 0.9), (5, None))
        assert run_ensemble(spec) == run_ensemble(spec)

    def test_jobs_do_not_change_result(self):
        a = run_ensemble(EnsembleSpec(transfer(0), 6, 2, "d", (0.5,)))
        b = run_ensemble(EnsembleSpec(transfer(0), 6, 2, "d", (0.5,), jobs=2))
        assert a == b

    def test_permutation_invariant(self):
        stats = run_ensemble(EnsembleSpec(transfer(2), 21, 4, "d", (0.6,)))
        xs = [r.values[0] for r in stats.samples]
        perm = np.random.default_rng(0).permutation(xs)
        assert _summarise(0.6, None, perm) == stats.point(0.6)

    def test_shared_seed_zero_width(self):
        stats = run_ensemble(EnsembleSpec(transfer(5), 2, 9, "d", (0.5,), shared_seed=True))
        assert decile_band_width(stats, 0.5) == 0.0

    def test_infinite_counted(self):
        stats = run_ensemble(EnsembleSpec(transfer(5), 5, 1, "d", (1.0,)))
        p = stats.point(1.0)
        assert p.count_infinite == 5 and math.isnan(p.median)
        with pytest.raises(UndefinedBand):
            decile_band_width(stats, 1.0)

    def test_partial_horizons_ordered(self):
        stats = run_ensemble(EnsembleSpec(STAR, 10, 5, "d", (0.3,), (10, 100, None)))
        for r in stats.samples:
            assert r.values[0] <= r.values[1] <= r.values[2] + 1e-9
        p = stats.point(0.3, 10)
        assert p.lower_decile <= p.median <= p.upper_decile

    def test_failure_names_seed(self):
        with pytest.raises(RuntimeError, match="seed=4 grid_index=0 sample=0"):
            run_ensemble(EnsembleSpec(transfer(9), 2, 4, "d", (0.5,)))


class TestCsv:
    def test_files(self, tmp_path):
        spec = EnsembleSpec(transfer(5), 3, 1, "d", (0.5, 1.0), (4, None))
        stats = run_ensemble(spec)
        write_stats_csv(stats, tmp_path / "s.csv")
        write_samples_csv(stats, spec.horizons, tmp_path / "r.csv")
        with open(tmp_path / "s.csv") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["d", "L", "lower", "median", "upper", "mean", "count_infinite", "n"]
        assert len(rows) == 1 + 2 * 2
        assert rows[2][1] == "inf"
        with open(tmp_path / "r.csv") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["d", "sample", "L", "T", "relevant_dim", "psi_unital"]
        assert len(rows) == 1 + 2 * 3 * 2
        assert any(r[3] == "inf" for r in rows[1:])
