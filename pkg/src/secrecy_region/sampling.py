"""Seeded complex-Gaussian fading samples and deterministic Monte-Carlo means."""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .channel_model import ChannelStats, Scenario, validate_stats
from .errors import BadCount, EvaluationError

CHUNK = 1024


@dataclass(frozen=True, eq=False)
class FadingBatch:
    samples: np.ndarray  # (count, n_t) complex, one realisation per row
    source_seed: int
    stats_label: str

    def __post_init__(self):
        self.samples.setflags(write=False)

    def __len__(self):
        return self.samples.shape[0]

    @property
    def n_t(self) -> int:
        return self.samples.shape[1]


def psd_sqrt(cov) -> np.ndarray:
    """Return ``L`` with ``L L^H = cov``.

    Cholesky on the Hermitian part, falling back to an eigendecomposition
    with negative eigenvalues clipped to zero for singular matrices.
    """
    cov = np.asarray(cov, dtype=complex)
    cov = (cov + cov.conj().T) / 2
    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        lam, vec = np.linalg.eigh(cov)
        return vec * np.sqrt(np.clip(lam, 0.0, None))


def sample_channel(stats: ChannelStats, count: int, seed: int) -> FadingBatch:
    if int(count) != count or count < 1:
        raise BadCount(f"sample count must be a positive integer, got {count}", "count")
    stats = validate_stats(stats)
    rng = np.random.default_rng(seed)
    # real and imaginary parts each carry variance 1/2
    z = rng.standard_normal((int(count), stats.n_t, 2)) @ np.array([1.0, 1.0j]) / np.sqrt(2.0)
    samples = stats.mean + z @ psd_sqrt(stats.cov).T
    return FadingBatch(samples, int(seed), stats.label)


def user_seed(seed: int, user: int) -> int:
    """Independent 64-bit stream seed for ``user`` derived from a scenario seed."""
    return int(np.random.SeedSequence([int(seed), int(user)]).generate_state(1, np.uint64)[0])


def draw_batches(scenario: Scenario) -> tuple[FadingBatch, FadingBatch]:
    """One batch per user; reused for every alpha, order and iteration of a run."""
    return (sample_channel(scenario.user1, scenario.mc_samples, user_seed(scenario.seed, 1)),
            sample_channel(scenario.user2, scenario.mc_samples, user_seed(scenario.seed, 2)))


def _chunk_sum(values, start):
    return values[start:start + CHUNK].sum(axis=0)


def tree_mean(values, workers: int = 1):
    """Mean over axis 0 with a fixed reduction order.

    Chunks of ``CHUNK`` rows are summed first, then the chunk sums are added
    pairwise. The grouping never depends on ``workers``, so the result is
    bit-identical for any thread count.
    """
    values = np.asarray(values)
    n = values.shape[0]
    if n == 0:
        raise BadCount("cannot average an empty batch", "batch")
    if np.iscomplexobj(values):
        nan_rows = np.isnan(values.real) | np.isnan(values.imag)
    else:
        nan_rows = np.isnan(values)
    if nan_rows.any():
        idx = int(np.argwhere(nan_rows)[0][0])
        raise EvaluationError(f"per-sample value is NaN at sample index {idx}", idx)
    if np.all(values == values[0]):
        return values[0].copy() if values.ndim > 1 else values[0]
    starts = range(0, n, CHUNK)
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            sums = list(pool.map(lambda s: _chunk_sum(values, s), starts))
    else:
        sums = [_chunk_sum(values, s) for s in starts]
    while len(sums) > 1:
        paired = [sums[i] + sums[i + 1] for i in range(0, len(sums) - 1, 2)]
        if len(sums) % 2:
            paired.append(sums[-1])
        sums = paired
    return sums[0] / n


def stderr(values) -> float:
    """Standard error of the sample mean of a 1-D array."""
    values = np.asarray(values, dtype=float)
    if values.size < 2:
        return 0.0
    return float(np.std(values, ddof=1) / np.sqrt(values.size))


def mc_expect(batch: FadingBatch, f, workers: int = 1) -> float:
    """Monte-Carlo mean of ``f`` over ``batch``.

    ``f`` is vectorised: it receives the ``(count, n_t)`` sample array and
    returns one real value per row.
    """
    values = np.asarray(f(batch.samples), dtype=float)
    if values.shape != (len(batch),):
        values = np.broadcast_to(values, (len(batch),))
    return float(tree_mean(values, workers))


def mc_expect_with_error(batch: FadingBatch, f) -> tuple[float, float]:
    values = np.asarray(f(batch.samples), dtype=float)
    values = np.broadcast_to(values, (len(batch),))
    return float(tree_mean(values)), stderr(values)
