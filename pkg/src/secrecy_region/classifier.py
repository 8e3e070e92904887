"""Decide from channel statistics whether both users can hold a positive
secrecy rate or the broadcast channel degrades to a wiretap channel."""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .channel_model import ChannelStats, rician_k_factor, validate_stats
from .errors import DimensionMismatch

SCALE_TOL = 1e-9
ZERO_TOL = 1e-12


class Verdict(str, enum.Enum):
    NON_TRIVIAL = "NonTrivial"
    USER1_SILENT = "DegradedUser1Silent"
    USER2_SILENT = "DegradedUser2Silent"
    BOTH_SILENT = "DegradedBothSilent"
    INCONCLUSIVE = "Inconclusive"

    def mirrored(self) -> Verdict:
        return {Verdict.USER1_SILENT: Verdict.USER2_SILENT,
                Verdict.USER2_SILENT: Verdict.USER1_SILENT}.get(self, self)


@dataclass(frozen=True)
class Classification:
    verdict: Verdict
    reasons: tuple[str, ...]
    low_snr_indefinite: bool | None  # None when the covariances coincide

    @property
    def silent_users(self) -> tuple[int, ...]:
        return {Verdict.USER1_SILENT: (1,), Verdict.USER2_SILENT: (2,),
                Verdict.BOTH_SILENT: (1, 2)}.get(self.verdict, ())


def _silent(weaker_scale: float) -> Verdict:
    # weaker_scale = (user 2 strength) / (user 1 strength)
    if abs(weaker_scale - 1.0) <= SCALE_TOL:
        return Verdict.BOTH_SILENT
    return Verdict.USER2_SILENT if weaker_scale < 1.0 else Verdict.USER1_SILENT


def covariance_scale(k1, k2) -> float | None:
    """``c`` with ``k2 = c k1`` (within ``SCALE_TOL`` after Frobenius
    normalisation), ``inf`` if only ``k1`` vanishes, ``None`` if not scaled."""
    n1, n2 = np.linalg.norm(k1), np.linalg.norm(k2)
    if n1 <= ZERO_TOL or n2 <= ZERO_TOL:
        if n1 <= ZERO_TOL and n2 <= ZERO_TOL:
            return 1.0
        return np.inf if n1 <= ZERO_TOL else 0.0
    if np.max(np.abs(k1 / n1 - k2 / n2)) <= SCALE_TOL:
        return n2 / n1
    return None


def low_snr_indefinite(user1: ChannelStats, user2: ChannelStats) -> bool | None:
    diff = user1.cov - user2.cov
    lam = np.linalg.eigvalsh((diff + diff.conj().T) / 2)
    tol = ZERO_TOL * max(1.0, np.max(np.abs(user1.cov)), np.max(np.abs(user2.cov)))
    if np.all(np.abs(lam) <= tol):
        return None
    return bool(lam[-1] > tol and lam[0] < -tol)


def classify(user1: ChannelStats, user2: ChannelStats) -> Classification:
    """Apply the degradedness rules in order; the first that fires decides.

    1. both zero-mean with isotropic covariances: the smaller variance is silent;
    2. both zero-mean with proportional covariances: the weaker user is silent;
    3. single antenna, zero-mean: always degraded;
    4. single antenna, equal Rician K-factor: the weaker user is silent;
    5. otherwise an indefinite covariance difference makes both rates
       positive at low SNR; anything else is inconclusive.
    """
    user1, user2 = validate_stats(user1), validate_stats(user2)
    if user1.n_t != user2.n_t:
        raise DimensionMismatch(f"users have {user1.n_t} and {user2.n_t} antennas", "user2")
    indefinite = low_snr_indefinite(user1, user2)
    zero_mean = not user1.mean.any() and not user2.mean.any()
    n_t = user1.n_t
    eye = np.eye(n_t)

    if zero_mean:
        s1, s2 = user1.cov[0, 0].real, user2.cov[0, 0].real
        if np.allclose(user1.cov, s1 * eye, rtol=0, atol=SCALE_TOL) and \
                np.allclose(user2.cov, s2 * eye, rtol=0, atol=SCALE_TOL):
            verdict = _silent(s2 / s1 if s1 > 0 else np.inf if s2 > 0 else 1.0)
            return Classification(verdict, (f"iid-rayleigh: i.i.d. Rayleigh pair (sigma1^2={s1:g}, sigma2^2={s2:g}) "
                                            "is degraded: a pair of i.i.d. channels cannot both be secret",),
                                  indefinite)
        scale = covariance_scale(user1.cov, user2.cov)
        if scale is not None:
            rule = "siso-rayleigh: single-antenna Rayleigh pair is degraded" if n_t == 1 else \
                "scaled-covariance: zero-mean covariances are scaled copies of each other"
            return Classification(_silent(scale), (f"{rule} (K2 = {scale:g} K1)",), indefinite)
    if n_t == 1 and not zero_mean:
        k1, k2 = rician_k_factor(user1), rician_k_factor(user2)
        if k1 is not None and k2 is not None and abs(k1 - k2) <= SCALE_TOL * max(1.0, abs(k1)):
            strength1 = user1.cov[0, 0].real
            strength2 = user2.cov[0, 0].real
            return Classification(_silent(strength2 / strength1),
                                  (f"siso-rician-equal-k: single-antenna Rician pair with equal K-factor {k1:g} is degraded",),
                                  indefinite)
    if indefinite:
        return Classification(Verdict.NON_TRIVIAL,
                              ("low-snr-indefinite: covariance difference is indefinite: both users have positive "
                               "rates at low SNR",), indefinite)
    return Classification(Verdict.INCONCLUSIVE,
                          ("none: no degradedness rule fired and the covariance difference is "
                           "semidefinite; the available conditions are only necessary",), indefinite)
