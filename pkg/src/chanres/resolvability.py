"""Random-coding simulation of output-distribution approximation.

A code is a list of input symbols; its output mixture is compared with
the target mixture W_p in variational distance and divergence.  The
Monte Carlo driver draws codes i.i.d. from p, evaluates both gaps
exactly on the n-fold product channel, and places the sample means
next to the analytic expectation bounds computed from the tail pair
(delta, delta_prime) and the phi generating function.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .channel import (
    DEFAULT_BUDGET,
    BudgetError,
    Channel,
    Distribution,
    EnumerationBudget,
    output_distribution,
    product,
)
from .exponents import phi
from .rng import sample_indices, stream
from .spectrum import eta, product_tail_pair

PHI_T_GRID = np.linspace(-0.5, -0.05, 11)


@dataclass(frozen=True)
class ResolvabilityCode:
    """Multiset of input symbols, one per codeword slot."""

    codewords: tuple[int, ...]
    M: int

    def __post_init__(self):
        object.__setattr__(self, "codewords",
                           tuple(int(c) for c in self.codewords))
        if self.M != len(self.codewords) or self.M < 1:
            raise ValueError("M must equal the number of codewords")
        if any(c < 0 for c in self.codewords):
            raise ValueError("codeword indices must be nonnegative")


@dataclass(frozen=True)
class McEstimate:
    """Sample mean with its standard error next to an analytic bound."""

    mean: float
    std_error: float
    trials: int
    bound: float
    seed: int

    def __post_init__(self):
        if self.trials < 2:
            raise ValueError("standard error needs at least 2 trials")


def sample_code(p: Distribution, M: int, seed: int) -> ResolvabilityCode:
    """Draw M codewords i.i.d. from p; draw j uses the (seed, j) stream."""
    if M < 1:
        raise ValueError("M must be positive")
    u = np.array([stream(seed, j).random() for j in range(M)])
    idx = sample_indices(p.probs, u)
    return ResolvabilityCode(tuple(int(i) for i in idx), M)


def _gaps(mix: np.ndarray, wp: np.ndarray) -> tuple[float, float]:
    eps = float(np.abs(mix - wp).sum())
    mask = mix > 0
    if np.any(wp[mask] == 0):
        return eps, math.inf
    div = float(np.sum(mix[mask] * (np.log(mix[mask]) - np.log(wp[mask]))))
    return eps, max(div, 0.0)


def eval_code(code: ResolvabilityCode, W: Channel, p: Distribution
              ) -> tuple[float, float]:
    """Exact (variational distance, divergence) of the code's output mixture."""
    if max(code.codewords) >= W.input_size:
        raise ValueError("codeword index outside the input alphabet")
    wp = output_distribution(W, p).probs
    mix = W.rows[list(code.codewords)].mean(axis=0)
    return _gaps(mix, wp)


def _kron_row(rows: np.ndarray, word) -> np.ndarray:
    out = rows[word[0]]
    for c in word[1:]:
        out = np.kron(rows[c], out)
    return out


def expectation_bounds(p: Distribution, W: Channel, M: int, C: float,
                       n: int = 1,
                       budget: EnumerationBudget = DEFAULT_BUDGET):
    """Tail pair and the three expectation bounds at codebook size M.

    Returns (tail, vd_bound, kl_eta_bound, kl_phi_bound) where the
    variational-distance bound is 2*delta + sqrt(delta_prime/M), the
    corner-term divergence bound is eta(delta) + delta*log|Y^n| +
    delta_prime/M, and the phi bound is minimized over a fixed t grid.
    """
    if M < 1:
        raise ValueError("M must be positive")
    tp = product_tail_pair(p, W, C, n, budget)
    bound_vd = 2.0 * tp.delta + math.sqrt(tp.delta_prime / M)
    bound_eta = (eta(tp.delta) + tp.delta * n * math.log(W.output_size)
                 + tp.delta_prime / M)
    log_m = math.log(M)
    bound_phi = float(min(
        math.log1p(math.exp(t * log_m + n * phi(t, W, p))) / (-t)
        for t in PHI_T_GRID
    ))
    return tp, bound_vd, bound_eta, bound_phi


def mc_expectation(p: Distribution, W: Channel, M: int, C: float,
                   trials: int, seed: int, n: int = 1,
                   budget: EnumerationBudget = DEFAULT_BUDGET,
                   workers: int = 1
                   ) -> tuple[McEstimate, McEstimate, McEstimate]:
    """Monte Carlo means of both gaps on the n-fold product channel.

    Codewords are sampled coordinate-wise from p (the product law is
    never materialized), trial i using the (seed, i) stream.  Returns
    three estimates: variational distance against 2*delta +
    sqrt(delta_prime/M), divergence against the corner-term bound
    eta(delta) + delta*log|Y^n| + delta_prime/M, and the same
    divergence samples against the phi-based bound minimized over a
    t grid.
    """
    if trials < 100:
        raise ValueError("at least 100 trials are required")
    if M < 1:
        raise ValueError("M must be positive")
    if workers < 1:
        raise ValueError("workers must be positive")
    K, L = W.input_size, W.output_size
    budget.check(L ** n, f"{n}-fold output distribution")

    _, bound_vd, bound_eta, bound_phi = expectation_bounds(
        p, W, M, C, n, budget)

    wp1 = output_distribution(W, p).probs
    wpn = wp1
    for _ in range(n - 1):
        wpn = np.kron(wp1, wpn)

    dense = (K ** n) * (L ** n) <= budget.max_joint_states
    rows_n = product(W, n, budget).rows if dense else None
    weights = K ** np.arange(n)

    def run_trial(i: int) -> tuple[float, float]:
        u = stream(seed, i).random((M, n))
        words = sample_indices(p.probs, u)
        if dense:
            mix = rows_n[words @ weights].mean(axis=0)
        else:
            mix = np.zeros(L ** n)
            for word in words:
                mix += _kron_row(W.rows, word)
            mix /= M
        return _gaps(mix, wpn)

    eps_s = np.empty(trials)
    div_s = np.empty(trials)
    if workers == 1:
        for i in range(trials):
            eps_s[i], div_s[i] = run_trial(i)
    else:
        def run_chunk(lo: int, hi: int):
            return lo, [run_trial(i) for i in range(lo, hi)]

        step = -(-trials // workers)
        spans = [(lo, min(lo + step, trials))
                 for lo in range(0, trials, step)]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for lo, vals in pool.map(lambda sp: run_chunk(*sp), spans):
                for off, (e, d) in enumerate(vals):
                    eps_s[lo + off] = e
                    div_s[lo + off] = d

    def estimate(samples: np.ndarray, bound: float) -> McEstimate:
        return McEstimate(
            mean=float(np.mean(samples)),
            std_error=float(np.std(samples, ddof=1) / math.sqrt(trials)),
            trials=trials, bound=float(bound), seed=seed,
        )

    return (estimate(eps_s, bound_vd),
            estimate(div_s, bound_eta),
            estimate(div_s, bound_phi))


@dataclass(frozen=True)
class BruteForceResult:
    """Exact minima of both gaps over all size-M multisets."""

    eps_min: float
    best_code: ResolvabilityCode
    div_min: float
    best_code_div: ResolvabilityCode


def brute_force_min(M: int, W: Channel, p: Distribution,
                    limit: int = 10 ** 6) -> BruteForceResult:
    """Exhaustive minimization over codeword multisets of size M."""
    if M < 1:
        raise ValueError("M must be positive")
    K = W.input_size
    count = math.comb(K + M - 1, M)
    if count > limit:
        raise BudgetError(
            f"brute force would scan {count} multisets, over the cap of {limit}"
        )
    wp = output_distribution(W, p).probs
    best_eps = math.inf
    best_div = math.inf
    arg_eps = arg_div = None
    for combo in itertools.combinations_with_replacement(range(K), M):
        mix = W.rows[list(combo)].mean(axis=0)
        eps, div = _gaps(mix, wp)
        if eps < best_eps:
            best_eps, arg_eps = eps, combo
        if div < best_div:
            best_div, arg_div = div, combo
    return BruteForceResult(
        eps_min=best_eps, best_code=ResolvabilityCode(arg_eps, M),
        div_min=best_div, best_code_div=ResolvabilityCode(arg_div, M),
    )


@dataclass(frozen=True)
class CountingVerdict:
    """Outcome of the identification counting argument."""

    eps_estimate: float
    hypothesis_holds: bool
    size_ceiling: int | None


def size_ceiling_check(mu: float, lam: float, eps_value: float,
                       input_size: int, M: int) -> CountingVerdict:
    """Pure arithmetic form of the counting argument.

    When mu + lam + eps < 1, distinguishable message sets inject into
    codeword multisets, so their number is capped by input_size ** M.
    """
    for name, v in (("mu", mu), ("lambda", lam)):
        if not 0.0 <= v <= 1.0:
            raise ValueError(f"{name} must lie in [0, 1]")
    if eps_value < 0:
        raise ValueError("eps must be nonnegative")
    holds = (1.0 - mu - lam) > eps_value
    ceiling = int(input_size) ** int(M) if holds else None
    return CountingVerdict(float(eps_value), holds, ceiling)


def counting_check(mu: float, lam: float, M: int, W: Channel,
                   p_grid) -> CountingVerdict:
    """Counting argument with eps estimated over a grid of input laws.

    The approximation floor eps(M, W) is estimated as the largest
    brute-force minimum over the supplied grid.
    """
    p_grid = list(p_grid)
    if not p_grid:
        raise ValueError("p_grid must be non-empty")
    eps = max(brute_force_min(M, W, q).eps_min for q in p_grid)
    return size_ceiling_check(mu, lam, eps, W.input_size, M)
