"""Covariance direction selection, the inflation-factor fixed point and
assembly of whole rate regions over the power split and encoding orders."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .channel_model import ORDERS, EncodingOrder, InflationFactor, Scenario, TransmitCovariances
from .errors import SingularDenominator, SingularExpectation, ValidationError
from .region_math import (RatePair, block_matrices, bound_terms, combine_bounds, full_csit_rates,
                          log_det_values, low_snr_region, mmse_inflation_factor, secrecy_rates)
from .sampling import FadingBatch, draw_batches, tree_mean

log = logging.getLogger(__name__)

SCHEMES = ("statistical-csit", "full-csit", "time-sharing", "interference-as-noise", "mean-mmse-b")
MIN_DAMPING = 1.0 / 16
COND_LIMIT = 1e12


# -- generalized Rayleigh quotient -----------------------------------------

def _phase_fix(e):
    k = int(np.argmax(np.abs(e)))
    return e * (abs(e[k]) / e[k])


def rayleigh_quotient(a, b, e) -> float:
    e = np.asarray(e, dtype=complex)
    return float(np.vdot(e, a @ e).real / np.vdot(e, b @ e).real)


def grq_max(numerator, denominator, tol=1e-12):
    """Maximise ``e^H A e / e^H B e`` over unit vectors.

    Whitens with the Cholesky factor of ``B`` and takes the top eigenvector.
    When the top eigenvalue is repeated, the returned vector is the
    normalised projection of the lowest-index standard basis vector onto
    the maximising subspace. The largest-magnitude entry of the result is
    real and nonnegative.

    Returns ``(e, value)``.
    """
    a = np.asarray(numerator, dtype=complex)
    b = np.asarray(denominator, dtype=complex)
    a = (a + a.conj().T) / 2
    b = (b + b.conj().T) / 2
    if np.linalg.eigvalsh(b)[0] < tol:
        raise SingularDenominator("denominator matrix of the Rayleigh quotient is not positive definite")
    chol = np.linalg.cholesky(b)
    x = np.linalg.solve(chol, a)
    c = np.linalg.solve(chol, x.conj().T).conj().T  # L^-1 A L^-H
    lam, y = np.linalg.eigh((c + c.conj().T) / 2)
    top = lam >= lam[-1] - 1e-10 * max(1.0, abs(lam[-1]))
    basis = np.linalg.solve(chol.conj().T, y[:, top])  # maximisers in original coordinates
    if basis.shape[1] == 1:
        e = basis[:, 0]
    else:
        q, _ = np.linalg.qr(basis)
        e = None
        for i in range(a.shape[0]):
            proj = q @ q[i].conj()
            if np.linalg.norm(proj) > 1e-8:
                e = proj
                break
    e = _phase_fix(e / np.linalg.norm(e))
    return e, rayleigh_quotient(a, b, e)


def select_covariances(scenario: Scenario, alpha: float, order: EncodingOrder,
                       p_t: float | None = None) -> TransmitCovariances:
    """Unit-rank covariances for power split ``alpha`` and ``order``.

    The first direction trades the first user's channel energy against the
    second user's; the second direction does the reverse with both sides
    loaded by the energy each user already receives from the first signal.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValidationError(f"alpha must lie in [0, 1], got {alpha}", "alpha")
    p_t = scenario.total_power if p_t is None else p_t
    r_first = scenario.user(order.first).correlation
    r_second = scenario.user(order.second).correlation
    eye = np.eye(scenario.n_t)
    p1, p2 = alpha * p_t, (1.0 - alpha) * p_t
    e1, _ = grq_max(eye + p1 * r_first, eye + p1 * r_second)
    load_second = 1.0 + p1 * np.vdot(e1, r_second @ e1).real
    load_first = 1.0 + p1 * np.vdot(e1, r_first @ e1).real
    e2, _ = grq_max(eye + p2 * r_second / load_second, eye + p2 * r_first / load_first)
    return TransmitCovariances.from_directions(e1, e2, alpha, p_t)


# -- inflation factor ---------------------------------------------------------

def inflation_update(tc: TransmitCovariances, b: InflationFactor, batch_pi1: FadingBatch) -> np.ndarray:
    """Stationarity map ``f(b) = -E[A1^H]^-1 E[A2^H h^H]`` with ``[A1; A2] = M^-1 [I; 0]``.

    The first block column of ``M^-1`` comes from the block inverse: the
    top-left block ``P = I + b K2 b^H`` is the same for every sample, so
    only the scalar Schur complement varies.
    """
    n = tc.rank_n
    h = batch_pi1.samples
    m = block_matrices(tc, b, h)
    p_inv = np.linalg.inv(m[0, :n, :n])
    c = m[:, :n, n]  # (count, N)
    pc = c @ p_inv.T  # rows P^-1 c
    schur = (m[:, n, n] - np.sum(c.conj() * pc, axis=1)).real
    # A1 = P^-1 + P^-1 c c^H P^-1 / schur is Hermitian; A2^H = -P^-1 c / schur
    a1h = p_inv + pc[:, :, None] * pc.conj()[:, None, :] / schur[:, None, None]
    a2h = -pc / schur[:, None]
    e_a1h = tree_mean(a1h)
    e_a2h_hh = tree_mean(a2h[:, :, None] * h.conj()[:, None, :])
    if np.linalg.cond(e_a1h) > COND_LIMIT:
        raise SingularExpectation(f"E[A1^H] is numerically singular (cond {np.linalg.cond(e_a1h):.3g})")
    return -np.linalg.solve(e_a1h, e_a2h_hh)


def solve_inflation_factor(tc: TransmitCovariances, batch_pi1: FadingBatch, batch_pi2: FadingBatch,
                           epsilon: float = 1e-3, max_iters: int = 200,
                           stop_rule: str = "absolute") -> InflationFactor:
    """Fixed-point iteration for the statistical-CSIT inflation factor.

    Starts from ``b = 0`` and iterates ``b <- (1-g) b + g f(b)``. The step
    ``g`` starts at 1 and is halved (down to 1/16) whenever a step lowers the
    rates. Stops once the largest change of the two secrecy bounds between
    successive iterates drops below ``epsilon`` (absolute, or relative to the
    bound with ``stop_rule="relative"``). The iterate with the best rates is
    returned; ``residual`` is ``||f(b) - b||_F`` there.
    """
    zero = InflationFactor.zeros(tc.rank_n, tc.n_t)
    if not tc.k_u2.any():
        # the block matrix no longer depends on b: nothing to pre-cancel
        return InflationFactor(zero.b, iterations=1, residual=0.0, converged=True)

    own1, own2, leak = (float(tree_mean(v)) for v in bound_terms(tc, batch_pi1, batch_pi2))

    def bounds(cand):
        return combine_bounds(own1, own2, leak, log_det_values(tc, cand, batch_pi1))

    def change(new, old):
        diffs = [abs(n - o) for n, o in zip(new, old)]
        if stop_rule == "relative":
            diffs = [d / max(abs(o), 1e-12) for d, o in zip(diffs, old)]
        return max(diffs)

    b = zero.b
    rates = bounds(zero)
    best_b, best_rates = b, rates
    history = [rates]
    gamma = 1.0
    converged = False
    it = 0
    f_b = inflation_update(tc, zero, batch_pi1)
    while it < max_iters:
        it += 1
        cand = (1.0 - gamma) * b + gamma * f_b
        new_rates = bounds(InflationFactor(cand))
        if new_rates[0] < rates[0] - 1e-15 and gamma > MIN_DAMPING:
            gamma /= 2
            continue
        delta = change(new_rates, rates)
        b, rates = cand, new_rates
        history.append(rates)
        if rates[0] > best_rates[0]:
            best_b, best_rates = b, rates
        if delta < epsilon:
            converged = True
            break
        f_b = inflation_update(tc, InflationFactor(b), batch_pi1)
    if not converged:
        log.warning("inflation factor did not converge in %d iterations (alpha=%.3f)", max_iters, tc.alpha)
    best = InflationFactor(best_b)
    residual = float(np.linalg.norm(inflation_update(tc, best, batch_pi1) - best_b))
    return InflationFactor(best_b, iterations=it, residual=residual, converged=converged,
                           history=tuple(history))


# -- frontier ---------------------------------------------------------------------

def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def upper_right_hull(points: list[RatePair], scheme: str = "") -> list[RatePair]:
    """Strict Pareto frontier of the convex hull of ``points``.

    The cloud is augmented with the origin and both axis endpoints (free
    disposal); the result is sorted by ``r1`` with ``r2`` strictly
    decreasing.
    """
    if not points:
        return [RatePair(0.0, 0.0, scheme=scheme, order="axis")]
    r1_max = max(p.r1 for p in points)
    r2_max = max(p.r2 for p in points)
    cloud = list(points) + [RatePair(0.0, 0.0, scheme=scheme, order="axis"),
                            RatePair(r1_max, 0.0, scheme=scheme, order="axis"),
                            RatePair(0.0, r2_max, scheme=scheme, order="axis")]
    # real points first so ties keep their provenance
    cloud.sort(key=lambda p: (-p.r1, -p.r2, p.order == "axis"))
    pareto = []
    for p in cloud:
        if not pareto or p.r2 > pareto[-1].r2:
            pareto.append(p)
    pareto.reverse()
    hull: list[RatePair] = []
    for p in pareto:
        while len(hull) >= 2 and _cross((hull[-2].r1, hull[-2].r2), (hull[-1].r1, hull[-1].r2),
                                        (p.r1, p.r2)) >= 0:
            hull.pop()
        hull.append(p)
    return hull


def frontier_value(frontier: list[RatePair], r1: float) -> float:
    """Largest ``r2`` on the (piecewise linear) frontier at ``r1``; ``-inf`` beyond it."""
    xs = np.array([p.r1 for p in frontier])
    ys = np.array([p.r2 for p in frontier])
    if r1 > xs[-1] + 1e-15:
        return -math.inf
    if xs[0] > 0:
        xs = np.concatenate([[0.0], xs])
        ys = np.concatenate([[ys[0]], ys])
    return float(np.interp(r1, xs, ys))


def dominates(upper: list[RatePair], lower: list[RatePair], slack: float = 0.0, grid: int = 201) -> bool:
    """Whether ``upper`` contains ``lower`` up to ``slack`` in both coordinates."""
    r1_end = lower[-1].r1
    for r1 in np.linspace(0.0, r1_end, grid):
        if frontier_value(upper, max(r1 - slack, 0.0)) < frontier_value(lower, r1) - slack:
            return False
    return True


@dataclass(frozen=True, eq=False)
class RegionResult:
    frontier: list
    raw_points: list
    scenario: Scenario
    scheme: str
    extras: dict = field(default_factory=dict)

    @property
    def max_stderr(self) -> float:
        return max([max(p.r1_stderr, p.r2_stderr) for p in self.raw_points], default=0.0)


# -- region assembly ------------------------------------------------------------

def alpha_values(scenario: Scenario) -> np.ndarray:
    if scenario.alpha_grid == 1:
        return np.array([1.0])
    return np.linspace(0.0, 1.0, scenario.alpha_grid)


def region_point(scenario: Scenario, scheme: str, alpha: float, order: EncodingOrder,
                 batches: tuple[FadingBatch, FadingBatch]) -> RatePair:
    """One evaluated point of a swept scheme (everything but time sharing)."""
    tc = select_covariances(scenario, alpha, order)
    batch1, batch2 = batches
    if scheme == "full-csit":
        return full_csit_rates(tc, batch1, batch2, order)
    bp1, bp2 = (batch1, batch2) if order.first == 1 else (batch2, batch1)
    if scheme == "statistical-csit":
        b = solve_inflation_factor(tc, bp1, bp2, scenario.epsilon, scenario.max_iters, scenario.stop_rule)
    elif scheme == "interference-as-noise":
        b = InflationFactor.zeros(tc.rank_n, tc.n_t)
    elif scheme == "mean-mmse-b":
        b = mmse_inflation_factor(tc, scenario.user(order.first).mean)
    else:
        raise ValidationError(f"unknown scheme {scheme!r}", "schemes")
    return secrecy_rates(tc, b, batch1, batch2, order, scheme=scheme)


def endpoint_wiretap_rate(scenario: Scenario, user: int, power: float,
                          batches: tuple[FadingBatch, FadingBatch]) -> RatePair:
    """Rate of ``user`` alone at ``power`` (the other user only eavesdrops)."""
    order = EncodingOrder(user, 3 - user)
    tc = select_covariances(scenario, 1.0, order, p_t=power)
    return secrecy_rates(tc, InflationFactor.zeros(tc.rank_n, tc.n_t), *batches, order, scheme="wiretap")


def time_sharing_points(scenario: Scenario, batches, grid: int = 21) -> list[RatePair]:
    """Time share ``t`` for user 1 at power ``P1``, ``1-t`` for user 2 at ``P2``.

    ``P1 = beta P / t`` and ``P2 = (1-beta) P / (1-t)`` so the average power
    is exactly ``P``; ``order`` records ``beta`` and ``alpha`` records ``t``.
    """
    p_t = scenario.total_power
    cache: dict = {}

    def rate(user, power):
        key = (user, float(power))
        if key not in cache:
            cache[key] = endpoint_wiretap_rate(scenario, user, power, batches)
        return cache[key]

    points = []
    for t in np.linspace(0.0, 1.0, grid):
        for beta in np.linspace(0.0, 1.0, grid):
            if (t == 0 and beta > 0) or (t == 1 and beta < 1):
                continue  # power spent on a user that never transmits
            r1 = r2 = s1 = s2 = 0.0
            if t > 0:
                w = rate(1, beta * p_t / t)
                r1, s1 = float(t * w.r1), float(t * w.r1_stderr)
            if t < 1:
                w = rate(2, (1 - beta) * p_t / (1 - t))
                r2, s2 = float((1 - t) * w.r2), float((1 - t) * w.r2_stderr)
            points.append(RatePair(r1, r2, scheme="time-sharing", alpha=float(t), order=f"beta={beta:g}",
                                   r1_stderr=s1, r2_stderr=s2))
    return points


def build_region(scenario: Scenario, scheme: str,
                 batches: tuple[FadingBatch, FadingBatch] | None = None) -> RegionResult:
    if scheme not in SCHEMES:
        raise ValidationError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}", "schemes")
    if batches is None:
        batches = draw_batches(scenario)
    if scheme == "time-sharing":
        raw = time_sharing_points(scenario, batches)
    else:
        raw = [region_point(scenario, scheme, float(a), order, batches)
               for order in ORDERS for a in alpha_values(scenario)]
    return RegionResult(upper_right_hull(raw, scheme), raw, scenario, scheme)


def low_snr_sweep(scenario: Scenario) -> list[RatePair]:
    return [low_snr_region(scenario.user1, scenario.user2, scenario.total_power, float(a))
            for a in alpha_values(scenario)]
