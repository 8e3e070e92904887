"""Domain types: channel statistics, scenarios, transmit covariances.

All containers are frozen dataclasses holding read-only numpy arrays, so a
value can be shared between threads and reused across a whole sweep.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DimensionMismatch, NonHermitian, NotPSD, ValidationError

HERMITIAN_TOL = 1e-12
PSD_FLOOR = -1e-10


def _frozen(a, dtype=complex):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class ChannelStats:
    """Mean and covariance of one user's fading vector ``H ~ CN(mean, cov)``."""

    mean: np.ndarray
    cov: np.ndarray
    label: str = "user"

    def __post_init__(self):
        object.__setattr__(self, "mean", _frozen(np.atleast_1d(self.mean)))
        object.__setattr__(self, "cov", _frozen(np.atleast_2d(self.cov)))

    @property
    def n_t(self) -> int:
        return self.cov.shape[0]

    @property
    def correlation(self) -> np.ndarray:
        """Second moment ``E[H H^H] = cov + mean mean^H``."""
        return self.cov + np.outer(self.mean, self.mean.conj())

    @classmethod
    def rayleigh(cls, cov, label="user"):
        cov = np.atleast_2d(cov)
        return validate_stats(cls(np.zeros(cov.shape[0]), cov, label))

    def __eq__(self, other):
        if not isinstance(other, ChannelStats):
            return NotImplemented
        return (self.label == other.label
                and self.mean.shape == other.mean.shape
                and self.cov.shape == other.cov.shape
                and np.array_equal(self.mean, other.mean)
                and np.array_equal(self.cov, other.cov))

    __hash__ = None


def validate_stats(stats: ChannelStats) -> ChannelStats:
    """Check the invariants of ``stats``.

    Returns the same object when ``cov`` is exactly Hermitian. A covariance
    that is Hermitian only up to ``HERMITIAN_TOL`` is replaced by its
    Hermitian part. Eigenvalues down to ``PSD_FLOOR`` are accepted; they are
    clipped to zero wherever a square root is taken (see
    :func:`secrecy_region.sampling.psd_sqrt`).
    """
    cov, mean = stats.cov, stats.mean
    if cov.ndim != 2 or cov.shape[0] != cov.shape[1]:
        raise DimensionMismatch(f"{stats.label}.cov must be square, got shape {cov.shape}", "cov")
    if mean.ndim != 1 or mean.shape[0] != cov.shape[0]:
        raise DimensionMismatch(
            f"{stats.label}.mean has length {mean.shape[0]} but cov is {cov.shape[0]}x{cov.shape[1]}",
            "mean")
    if not (np.all(np.isfinite(cov)) and np.all(np.isfinite(mean))):
        raise ValidationError(f"{stats.label} has non-finite entries", "cov")
    dev = np.max(np.abs(cov - cov.conj().T))
    if dev > HERMITIAN_TOL:
        raise NonHermitian(f"{stats.label}.cov is not Hermitian (max deviation {dev:.3g})", "cov")
    if dev > 0:
        stats = replace(stats, cov=(cov + cov.conj().T) / 2)
    lam_min = np.linalg.eigvalsh(stats.cov)[0]
    if lam_min < PSD_FLOOR:
        raise NotPSD(f"{stats.label}.cov has eigenvalue {lam_min:.3g} < 0", "cov")
    return stats


def rician_k_factor(stats: ChannelStats) -> float | None:
    """Line-of-sight to scattered power ratio ``|mean|^2 / tr(cov)``.

    ``None`` when the channel has no scattered component.
    """
    scattered = float(np.trace(stats.cov).real)
    if scattered <= 0:
        return None
    return float(np.vdot(stats.mean, stats.mean).real) / scattered


@dataclass(frozen=True, eq=False)
class Scenario:
    user1: ChannelStats
    user2: ChannelStats
    total_power: float
    mc_samples: int = 100_000
    seed: int = 42
    epsilon: float = 1e-3
    alpha_grid: int = 41
    max_iters: int = 200
    stop_rule: str = "absolute"

    def __post_init__(self):
        object.__setattr__(self, "user1", validate_stats(self.user1))
        object.__setattr__(self, "user2", validate_stats(self.user2))
        if self.user1.n_t != self.user2.n_t:
            raise DimensionMismatch(
                f"users have different antenna counts ({self.user1.n_t} vs {self.user2.n_t})", "user2")
        if not self.total_power >= 0:
            raise ValidationError(f"total_power must be >= 0, got {self.total_power}", "p_t")
        if not self.epsilon > 0:
            raise ValidationError(f"epsilon must be > 0, got {self.epsilon}", "epsilon")
        for name in ("mc_samples", "alpha_grid", "max_iters"):
            value = getattr(self, name)
            if int(value) != value or value < 1:
                raise ValidationError(f"{name} must be a positive integer, got {value}", name)
        if not 0 <= int(self.seed) < 2**64:
            raise ValidationError(f"seed must fit in 64 unsigned bits, got {self.seed}", "seed")
        if self.stop_rule not in ("absolute", "relative"):
            raise ValidationError(f"stop_rule must be 'absolute' or 'relative', got {self.stop_rule!r}",
                                  "stop_rule")

    @property
    def n_t(self) -> int:
        return self.user1.n_t

    def user(self, k: int) -> ChannelStats:
        return self.user1 if k == 1 else self.user2

    def with_power(self, p_t: float) -> Scenario:
        return replace(self, total_power=p_t)


@dataclass(frozen=True)
class EncodingOrder:
    """``first`` is encoded first and pre-cancels the other user's signal."""

    first: int = 1
    second: int = 2

    def __post_init__(self):
        if {self.first, self.second} != {1, 2}:
            raise ValidationError(f"encoding order must be a permutation of (1, 2), got "
                                  f"({self.first}, {self.second})", "order")

    def swapped(self) -> EncodingOrder:
        return EncodingOrder(self.second, self.first)

    def __str__(self):
        return f"{self.first}{self.second}"

    @classmethod
    def parse(cls, text: str) -> EncodingOrder:
        text = str(text).strip()
        if len(text) != 2 or not text.isdigit():
            raise ValidationError(f"cannot parse encoding order {text!r}", "order")
        return cls(int(text[0]), int(text[1]))


ORDERS = (EncodingOrder(1, 2), EncodingOrder(2, 1))


@dataclass(frozen=True, eq=False)
class TransmitCovariances:
    """Input covariances of the first- and second-encoded users.

    ``k_u1`` belongs to the user encoded first (and carries the factor
    ``t1`` with ``k_u1 = t1 t1^H``); ``k_u2`` to the one encoded second.
    """

    k_u1: np.ndarray
    k_u2: np.ndarray
    alpha: float
    t1: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "k_u1", _frozen(self.k_u1))
        object.__setattr__(self, "k_u2", _frozen(self.k_u2))
        t1 = np.asarray(self.t1, dtype=complex)
        if t1.ndim == 1:
            t1 = t1[:, None]
        object.__setattr__(self, "t1", _frozen(t1))
        n = self.k_u1.shape[0]
        if self.k_u1.shape != (n, n) or self.k_u2.shape != (n, n) or self.t1.shape[0] != n:
            raise DimensionMismatch(
                f"inconsistent shapes k_u1 {self.k_u1.shape}, k_u2 {self.k_u2.shape}, t1 {self.t1.shape}",
                "t1")

    @property
    def n_t(self) -> int:
        return self.k_u1.shape[0]

    @property
    def rank_n(self) -> int:
        return self.t1.shape[1]

    @classmethod
    def from_directions(cls, e1, e2, alpha: float, p_t: float) -> TransmitCovariances:
        """Unit-rank pair ``alpha p_t e1 e1^H`` and ``(1 - alpha) p_t e2 e2^H``."""
        e1 = np.asarray(e1, dtype=complex)
        e2 = np.asarray(e2, dtype=complex)
        p1, p2 = alpha * p_t, (1.0 - alpha) * p_t
        return cls(k_u1=p1 * np.outer(e1, e1.conj()), k_u2=p2 * np.outer(e2, e2.conj()),
                   alpha=float(alpha), t1=np.sqrt(p1) * e1)

    @classmethod
    def from_matrices(cls, k_u1, k_u2, alpha: float | None = None) -> TransmitCovariances:
        """Factor an arbitrary PSD ``k_u1`` as ``t1 t1^H`` with ``t1`` of its rank."""
        k_u1 = np.asarray(k_u1, dtype=complex)
        k_u2 = np.asarray(k_u2, dtype=complex)
        lam, vec = np.linalg.eigh((k_u1 + k_u1.conj().T) / 2)
        keep = lam > 1e-12 * max(1.0, lam[-1])
        if keep.any():
            t1 = vec[:, keep] * np.sqrt(lam[keep])
        else:
            t1 = np.zeros((k_u1.shape[0], 1), dtype=complex)
        if alpha is None:
            total = np.trace(k_u1).real + np.trace(k_u2).real
            alpha = np.trace(k_u1).real / total if total > 0 else 0.0
        return cls(k_u1=k_u1, k_u2=k_u2, alpha=float(alpha), t1=t1)

    def check(self, p_t: float) -> None:
        """Raise if the power budget or the factorisation is violated."""
        used = np.trace(self.k_u1).real + np.trace(self.k_u2).real
        if used > p_t + 1e-9:
            raise ValidationError(f"covariances use power {used:.6g} > budget {p_t:.6g}", "k_u2")
        if np.max(np.abs(self.t1 @ self.t1.conj().T - self.k_u1), initial=0.0) > 1e-10:
            raise ValidationError("t1 t1^H does not reproduce k_u1", "t1")


@dataclass(frozen=True, eq=False)
class InflationFactor:
    """Linear precoding weights ``b`` (``N x n_t``) plus solver diagnostics."""

    b: np.ndarray
    iterations: int = 0
    residual: float = 0.0
    converged: bool = True
    history: tuple = field(default=(), repr=False)

    def __post_init__(self):
        object.__setattr__(self, "b", _frozen(np.atleast_2d(self.b)))

    @classmethod
    def zeros(cls, rank_n: int, n_t: int) -> InflationFactor:
        return cls(np.zeros((rank_n, n_t), dtype=complex))

    def check_shape(self, tc: TransmitCovariances) -> None:
        if self.b.shape != (tc.rank_n, tc.n_t):
            raise DimensionMismatch(
                f"b has shape {self.b.shape}, expected ({tc.rank_n}, {tc.n_t})", "b")
