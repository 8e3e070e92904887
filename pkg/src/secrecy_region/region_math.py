"""Rate formulas: secrecy bounds, the block-determinant penalty, MMSE weights,
full-CSIT baseline rates and the low-SNR asymptote.

Rates are in bits per channel use (log base 2) throughout. Per-sample
arrays are reduced with :func:`secrecy_region.sampling.tree_mean` so every
expectation is reproducible bit for bit.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .channel_model import ChannelStats, EncodingOrder, InflationFactor, TransmitCovariances
from .errors import DimensionMismatch, NumericalConsistencyError
from .sampling import FadingBatch, stderr, tree_mean

IMAG_TOL = 1e-9
DET_FLOOR = 1 - 1e-9


@dataclass(frozen=True)
class RatePair:
    r1: float
    r2: float
    scheme: str = ""
    alpha: float = float("nan")
    order: str = ""
    r1_stderr: float = 0.0
    r2_stderr: float = 0.0
    b_iterations: int = 0
    b_residual: float = 0.0
    converged: bool = True

    def swapped(self) -> RatePair:
        return replace(self, r1=self.r2, r2=self.r1, r1_stderr=self.r2_stderr, r2_stderr=self.r1_stderr)


def _samples(x):
    return x.samples if isinstance(x, FadingBatch) else np.atleast_2d(np.asarray(x, dtype=complex))


def quad_form(k, samples) -> np.ndarray:
    """``h^H k h`` for every row ``h`` of ``samples``, clipped at zero."""
    k = np.asarray(k, dtype=complex)
    if samples.shape[1] != k.shape[0]:
        raise DimensionMismatch(f"samples have {samples.shape[1]} antennas, matrix is {k.shape}", "k")
    q = ((samples.conj() @ k) * samples).sum(axis=1).real
    return np.maximum(q, 0.0)


def log_quadratic_values(k, batch) -> np.ndarray:
    return np.log2(1.0 + quad_form(k, _samples(batch)))


def expect_log_quadratic(k, batch: FadingBatch) -> float:
    """Monte-Carlo estimate of ``E[log2(1 + H^H k H)]``."""
    return float(tree_mean(log_quadratic_values(k, batch)))


# -- block matrix -----------------------------------------------------------

def _check_shapes(tc: TransmitCovariances, b: InflationFactor, n_t: int):
    b.check_shape(tc)
    if n_t != tc.n_t:
        raise DimensionMismatch(f"channel has {n_t} antennas, covariances are {tc.n_t}x{tc.n_t}", "h")


def block_matrices(tc: TransmitCovariances, b: InflationFactor, samples) -> np.ndarray:
    """Stack of ``(N+1) x (N+1)`` matrices, one per channel realisation::

        [[I + b K2 b^H,        (T1^H + b K2) h  ],
         [h^H (T1 + K2 b^H),   1 + h^H (K1 + K2) h]]
    """
    samples = _samples(samples)
    _check_shapes(tc, b, samples.shape[1])
    bm, k2, t1 = b.b, tc.k_u2, tc.t1
    n_rank = tc.rank_n
    g = t1.conj().T + bm @ k2  # N x n_t
    top_right = samples @ g.T  # (n, N)
    corner = 1.0 + ((samples.conj() @ (tc.k_u1 + k2)) * samples).sum(axis=1).real
    m = np.empty((samples.shape[0], n_rank + 1, n_rank + 1), dtype=complex)
    m[:, :n_rank, :n_rank] = np.eye(n_rank) + bm @ k2 @ bm.conj().T
    m[:, :n_rank, n_rank] = top_right
    m[:, n_rank, :n_rank] = top_right.conj()
    m[:, n_rank, n_rank] = corner
    return m


@dataclass(frozen=True, eq=False)
class BlockMatrixM:
    matrix: np.ndarray

    def det(self) -> float:
        return float(_real_det(self.matrix[None])[0])


def assemble_block_matrix(tc: TransmitCovariances, b: InflationFactor, h) -> BlockMatrixM:
    h = np.asarray(h, dtype=complex).reshape(1, -1)
    return BlockMatrixM(block_matrices(tc, b, h)[0])


def lu_det(m) -> np.ndarray:
    """Determinants of a stack of small square matrices.

    Gaussian elimination with partial pivoting, vectorised over the stack.
    """
    a = np.array(np.moveaxis(np.asarray(m, dtype=complex), 0, -1))  # (n, n, count)
    n = a.shape[0]
    det = np.ones(a.shape[-1], dtype=complex)
    for k in range(n):
        best = np.abs(a[k, k])
        for r in range(k + 1, n):
            mag = np.abs(a[r, k])
            swap = mag > best
            if swap.any():
                best = np.where(swap, mag, best)
                row_k = a[k].copy()
                a[k] = np.where(swap, a[r], row_k)
                a[r] = np.where(swap, row_k, a[r])
                det = np.where(swap, -det, det)
        pivot = a[k, k]
        det = det * pivot
        safe = np.where(pivot == 0, 1.0, pivot)
        for r in range(k + 1, n):
            a[r, k:] -= (a[r, k] / safe) * a[k, k:]
    return det


def _real_det(m) -> np.ndarray:
    det = lu_det(m)
    scale = np.maximum(1.0, np.abs(det))
    if np.any(np.abs(det.imag) > IMAG_TOL * scale):
        raise NumericalConsistencyError(
            f"block determinant has imaginary part {np.max(np.abs(det.imag)):.3g}")
    return det.real


def log_det_values(tc: TransmitCovariances, b: InflationFactor, batch) -> np.ndarray:
    """Per-sample ``log2 det M``; always ``>= 0`` up to round-off."""
    samples = _samples(batch)
    _check_shapes(tc, b, samples.shape[1])
    if not tc.k_u2.any() and not b.b.any():
        # Schur complement 1 + h^H K1 h - |T1^H h|^2 is exactly one
        return np.zeros(samples.shape[0])
    det = _real_det(block_matrices(tc, b, samples))
    if np.any(det < DET_FLOOR):
        raise NumericalConsistencyError(f"block determinant {det.min():.6g} below 1")
    return np.log2(np.maximum(det, 1.0))


def rate_penalty(tc: TransmitCovariances, b: InflationFactor,
                 batch_pi1: FadingBatch, batch_pi2: FadingBatch) -> float:
    """Penalty subtracted from both secrecy bounds.

    Leakage of the first-encoded signal to the second user plus the
    expected log-determinant of the block matrix under the first user's
    channel.
    """
    return (expect_log_quadratic(tc.k_u1, batch_pi2)
            + float(tree_mean(log_det_values(tc, b, batch_pi1))))


def _by_order(order: EncodingOrder, batch1, batch2):
    return (batch1, batch2) if order.first == 1 else (batch2, batch1)


def bound_terms(tc, batch_pi1, batch_pi2):
    """Per-sample terms of the secrecy bounds that do not depend on ``b``."""
    k_sum = tc.k_u1 + tc.k_u2
    return (log_quadratic_values(k_sum, batch_pi1), log_quadratic_values(k_sum, batch_pi2),
            log_quadratic_values(tc.k_u1, batch_pi2))


def combine_bounds(own1, own2, leak, logdet):
    """``(E[own1] - penalty, E[own2] - penalty)``; arguments may be arrays or their means."""
    penalty = float(tree_mean(np.atleast_1d(leak))) + float(tree_mean(np.atleast_1d(logdet)))
    return (float(tree_mean(np.atleast_1d(own1))) - penalty,
            float(tree_mean(np.atleast_1d(own2))) - penalty)


def secrecy_bounds(tc, b, batch1, batch2, order: EncodingOrder):
    """Unclamped bounds ``(R_first, R_second)`` and their standard errors.

    Returned in encoding order, not user order.
    """
    bp1, bp2 = _by_order(order, batch1, batch2)
    own1, own2, leak = bound_terms(tc, bp1, bp2)
    logdet = log_det_values(tc, b, bp1)
    r_first, r_second = combine_bounds(own1, own2, leak, logdet)
    se_first = math.hypot(stderr(own1 - logdet), stderr(leak))
    se_second = math.hypot(stderr(own2 - leak), stderr(logdet))
    return r_first, r_second, se_first, se_second


def secrecy_rates(tc, b, batch1, batch2, order: EncodingOrder, scheme="statistical-csit") -> RatePair:
    """Achievable secrecy pair for one covariance pair, weight ``b`` and order.

    ``batch1``/``batch2`` hold user 1/user 2 channels; the result is in user
    order. Both bounds subtract the same penalty and are clamped at zero
    after the expectation.
    """
    r_first, r_second, se_first, se_second = secrecy_bounds(tc, b, batch1, batch2, order)
    pair = RatePair(max(r_first, 0.0), max(r_second, 0.0), scheme=scheme, alpha=tc.alpha,
                    order=str(order), r1_stderr=se_first, r2_stderr=se_second,
                    b_iterations=getattr(b, "iterations", 0), b_residual=getattr(b, "residual", 0.0),
                    converged=getattr(b, "converged", True))
    return pair if order.first == 1 else pair.swapped()


def wiretap_rate(k, batch_main: FadingBatch, batch_eve: FadingBatch) -> tuple[float, float]:
    """Single-user secrecy rate ``(E[log2(1+H_m^H k H_m)] - E[log2(1+H_e^H k H_e)])^+``."""
    main = log_quadratic_values(k, batch_main)
    eve = log_quadratic_values(k, batch_eve)
    rate = float(tree_mean(main)) - float(tree_mean(eve))
    return max(rate, 0.0), math.hypot(stderr(main), stderr(eve))


def mmse_inflation_factor(tc: TransmitCovariances, h) -> InflationFactor:
    """Full-CSIT weights ``T1^H h h^H / (1 + h^H K1 h)`` for one realisation."""
    h = np.asarray(h, dtype=complex).reshape(-1)
    if h.shape[0] != tc.n_t:
        raise DimensionMismatch(f"h has length {h.shape[0]}, expected {tc.n_t}", "h")
    denom = 1.0 + np.vdot(h, tc.k_u1 @ h).real
    return InflationFactor(np.outer(tc.t1.conj().T @ h, h.conj()) / denom)


def full_csit_rates(tc, batch1, batch2, order: EncodingOrder, scheme="full-csit") -> RatePair:
    """Rates with per-realisation MMSE weights.

    With the MMSE weights the block determinant collapses to
    ``(1 + h^H (K1+K2) h) / (1 + h^H K1 h)``, which gives the log ratios
    below; the positive part is taken inside the expectation. Samples of the
    two users are paired by index.
    """
    bp1, bp2 = _by_order(order, batch1, batch2)
    if len(bp1) != len(bp2):
        raise DimensionMismatch(f"paired batches differ in length ({len(bp1)} vs {len(bp2)})", "batch")
    k_sum = tc.k_u1 + tc.k_u2
    s1_own = log_quadratic_values(tc.k_u1, bp1)
    s1_leak = log_quadratic_values(tc.k_u1, bp2)
    first = np.maximum(s1_own - s1_leak, 0.0)
    second = np.maximum(log_quadratic_values(k_sum, bp2) + s1_own
                        - log_quadratic_values(k_sum, bp1) - s1_leak, 0.0)
    pair = RatePair(float(tree_mean(first)), float(tree_mean(second)), scheme=scheme, alpha=tc.alpha,
                    order=str(order), r1_stderr=stderr(first), r2_stderr=stderr(second))
    return pair if order.first == 1 else pair.swapped()


def low_snr_region(user1: ChannelStats, user2: ChannelStats, p_t: float, alpha: float) -> RatePair:
    """Linear low-power asymptote of the two secrecy rates."""
    if user1.n_t != user2.n_t:
        raise DimensionMismatch(f"users have {user1.n_t} and {user2.n_t} antennas", "user2")
    diff = user1.cov - user2.cov
    lam = np.linalg.eigvalsh((diff + diff.conj().T) / 2)
    r1 = max(alpha * p_t / math.log(2) * lam[-1], 0.0)
    r2 = max((1 - alpha) * p_t / math.log(2) * -lam[0], 0.0)
    return RatePair(r1, r2, scheme="low-snr", alpha=float(alpha), order="-")
