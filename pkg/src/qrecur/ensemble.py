"""Order statistics of return times over random walk ensembles.

Each sample ``k`` at grid point ``g`` draws its randomness from

    Philox(SeedSequence(entropy=seed, spawn_key=(g, k)))

so samples are independent of execution order and can run in worker
processes while staying bit-reproducible.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .builders import basis_state, build_channel
from .channel import is_unital_on
from .errors import UndefinedBand
from .numerics import DEFAULT_TOL, Tolerance
from .recurrence import analyse_horizons, relevant_subspace


@dataclass(frozen=True)
class EnsembleSpec:
    """One ensemble experiment.

    Attributes
    ----------
    builder : dict
        Builder config (see :func:`qrecur.builders.build_channel`); its random
        parts are drawn from the per-sample generator.
    n_samples : int
    seed : int
    sweep_param : str
        Builder key overwritten by each grid value, e.g. ``"d"``.
    sweep_values : tuple of float
    horizons : tuple
        Horizons ``L`` for ``T^(L)``; ``None`` means the exact value.
    psi : int
        Node the walk starts from (and returns to).
    shared_seed : bool
        Give every sample at a grid point the same seed (degenerate ensemble).
    jobs : int
        Worker processes; 1 runs inline.
    """

    builder: dict
    n_samples: int
    seed: int
    sweep_param: str = "d"
    sweep_values: tuple = (0.0,)
    horizons: tuple = (None,)
    psi: int = 0
    shared_seed: bool = False
    jobs: int = 1

    def __post_init__(self):
        if self.n_samples < 2:
            raise ValueError("an ensemble needs at least two samples")
        object.__setattr__(self, "sweep_values", tuple(float(v) for v in self.sweep_values))
        object.__setattr__(self, "horizons", tuple(self.horizons))


@dataclass(frozen=True)
class PointStats:
    value: float
    horizon: object
    median: float
    lower_decile: float
    upper_decile: float
    mean: float
    count_infinite: int
    count: int


@dataclass
class EnsembleStats:
    param: str
    points: list = field(default_factory=list)
    samples: list = field(default_factory=list)

    def point(self, value: float, horizon=None) -> PointStats:
        for p in self.points:
            if math.isclose(p.value, value, abs_tol=1e-12) and p.horizon == horizon:
                return p
        raise KeyError((value, horizon))


@dataclass(frozen=True)
class SampleResult:
    grid_index: int
    value: float
    sample: int
    values: tuple
    relevant_dim: int
    psi_unital: bool


def sample_seed(seed: int, grid_index: int, k: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(entropy=int(seed), spawn_key=(int(grid_index), int(k)))


def nearest_rank(sorted_values, fraction: float) -> float:
    n = len(sorted_values)
    rank = max(1, math.ceil(fraction * n))
    return float(sorted_values[rank - 1])


def _run_sample(spec: EnsembleSpec, grid_index: int, k: int, tol: Tolerance) -> SampleResult:
    value = spec.sweep_values[grid_index]
    cfg = dict(spec.builder)
    cfg[spec.sweep_param] = value
    key = 0 if spec.shared_seed else k
    seq = sample_seed(spec.seed, grid_index, key)
    try:
        channel = build_channel(cfg, seq)
        psi = basis_state(channel.dim, spec.psi)
        analysis, values = analyse_horizons(channel, psi, spec.horizons, tol)
        pi, _ = relevant_subspace(channel, psi, tol)
        unital = is_unital_on(channel, pi, tol)
    except Exception as exc:
        raise RuntimeError(
            f"sample failed: seed={spec.seed} grid_index={grid_index} sample={key} "
            f"({spec.sweep_param}={value}): {exc}"
        ) from exc
    return SampleResult(grid_index, value, k, tuple(values), analysis.relevant_dim, unital)


def _run_chunk(args):
    spec, grid_index, ks, tol = args
    return [_run_sample(spec, grid_index, k, tol) for k in ks]


def _summarise(value, horizon, xs) -> PointStats:
    xs = np.asarray(xs, dtype=float)
    finite = np.sort(xs[np.isfinite(xs)])
    n_inf = int(np.sum(~np.isfinite(xs)))
    if finite.size == 0:
        nan = math.nan
        return PointStats(value, horizon, nan, nan, nan, nan, n_inf, len(xs))
    return PointStats(
        value=value,
        horizon=horizon,
        median=nearest_rank(finite, 0.5),
        lower_decile=nearest_rank(finite, 0.1),
        upper_decile=nearest_rank(finite, 0.9),
        mean=float(finite.mean()),
        count_infinite=n_inf,
        count=len(xs),
    )


def run_ensemble(spec: EnsembleSpec, tol: Tolerance = DEFAULT_TOL) -> EnsembleStats:
    """Sample the ensemble at every grid value and collect order statistics.

    Deciles and medians use the nearest-rank rule (ranks ``ceil(0.1 n)``,
    ``ceil(0.5 n)``, ``ceil(0.9 n)``). Infinite return times are excluded
    from the order statistics and counted in ``count_infinite``.
    """
    jobs = [(spec, g, range(spec.n_samples), tol) for g in range(len(spec.sweep_values))]
    if spec.jobs > 1:
        chunks = []
        step = max(1, math.ceil(spec.n_samples / spec.jobs))
        for g in range(len(spec.sweep_values)):
            for lo in range(0, spec.n_samples, step):
                chunks.append((spec, g, range(lo, min(lo + step, spec.n_samples)), tol))
        with ProcessPoolExecutor(max_workers=spec.jobs) as pool:
            results = [r for chunk in pool.map(_run_chunk, chunks) for r in chunk]
    else:
        results = [r for job in jobs for r in _run_chunk(job)]
    results.sort(key=lambda r: (r.grid_index, r.sample))

    stats = EnsembleStats(param=spec.sweep_param, samples=results)
    for g, value in enumerate(spec.sweep_values):
        at = [r for r in results if r.grid_index == g]
        for i, h in enumerate(spec.horizons):
            stats.points.append(_summarise(value, h, [r.values[i] for r in at]))
    return stats


def decile_band_width(stats: EnsembleStats, value: float, horizon=None) -> float:
    p = stats.point(value, horizon)
    if p.count_infinite:
        raise UndefinedBand(f"{p.count_infinite} infinite samples at {stats.param}={value}")
    return p.upper_decile - p.lower_decile


# -- CSV output --------------------------------------------------------------

def _fmt(x) -> str:
    if x is None:
        return "inf"
    if isinstance(x, float) and math.isinf(x):
        return "inf"
    return repr(float(x)) if isinstance(x, float) else str(x)


def write_stats_csv(stats: EnsembleStats, path) -> None:
    """One row per (grid value, horizon) with the band statistics."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([stats.param, "L", "lower", "median", "upper", "mean", "count_infinite", "n"])
        for p in stats.points:
            w.writerow([_fmt(p.value), _fmt(p.horizon), _fmt(p.lower_decile), _fmt(p.median),
                        _fmt(p.upper_decile), _fmt(p.mean), p.count_infinite, p.count])


def write_samples_csv(stats: EnsembleStats, horizons, path) -> None:
    """Long-form raw data: one row per (grid value, sample, horizon)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([stats.param, "sample", "L", "T", "relevant_dim", "psi_unital"])
        for r in stats.samples:
            for h, t in zip(horizons, r.values):
                w.writerow([_fmt(r.value), r.sample, _fmt(h), _fmt(t), r.relevant_dim,
                            int(r.psi_unital)])
