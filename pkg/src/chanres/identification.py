"""Identification codes from resolvability primitives.

Two random constructions are combined here.  First, a family of
subsets of {0..M-1} of common size floor(tau*M) with pairwise
intersections strictly below kappa*floor(tau*M); a counting argument
guarantees floor(e^(tau*M)/(M*e)) such subsets exist, and rejection
sampling finds them.  Second, a list of M distinct input symbols whose
density-ratio level sets {y : W_x(y)/W_p(y) > C} are nearly disjoint;
i.i.d. candidates from p are screened against explicit miss and
union thresholds.  Message i is the uniform mixture over the codewords
picked out by subset i, decoded by the union of their level sets.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .channel import BudgetError, Channel, Distribution, output_distribution
from .rng import sample_indices, stream
from .spectrum import tail_pair

_LOG2P1 = math.log(2.0) + 1.0


class InfeasibleParams(ValueError):
    """The screening thresholds cannot admit any code."""


class RetriesExhausted(RuntimeError):
    """No attempt within the retry cap produced a full code."""

    def __init__(self, message, attempts):
        super().__init__(message)
        self.attempts = attempts


def _check_growth(tau: float, kappa: float) -> None:
    if not 0.0 < tau < 1.0 / 3.0:
        raise ValueError("tau must lie in (0, 1/3)")
    if not 0.0 < kappa < 1.0:
        raise ValueError("kappa must lie in (0, 1)")
    if kappa * math.log(1.0 / tau - 1.0) <= _LOG2P1:
        raise ValueError(
            "need kappa * log(1/tau - 1) > log(2) + 1 for the family count"
        )


@dataclass(frozen=True)
class AdParams:
    """Growth parameters for a nearly-disjoint subset family."""

    M: int
    tau: float
    kappa: float

    def __post_init__(self):
        if self.M < 1:
            raise ValueError("M must be positive")
        _check_growth(self.tau, self.kappa)

    @property
    def subset_size(self) -> int:
        return int(math.floor(self.tau * self.M))

    @property
    def family_size(self) -> int:
        # floor(e^(tau*M)/(M*e)) = floor(e^(tau*M - 1)/M)
        try:
            return int(math.floor(math.exp(self.tau * self.M - 1.0) / self.M))
        except OverflowError:
            raise BudgetError(
                "family size exceeds the representable range"
            ) from None


@dataclass(frozen=True)
class SetFamily:
    """Subsets of equal size with pairwise intersections below a cap."""

    subsets: tuple[frozenset, ...]
    subset_size: int
    overlap_cap: float

    def __post_init__(self):
        subsets = tuple(frozenset(int(v) for v in s) for s in self.subsets)
        object.__setattr__(self, "subsets", subsets)
        if not subsets:
            raise ValueError("family must contain at least one subset")
        if self.subset_size < 1:
            raise ValueError("subset_size must be positive")
        if self.overlap_cap <= 0:
            raise ValueError("overlap_cap must be positive")
        for i, s in enumerate(subsets):
            if len(s) != self.subset_size:
                raise ValueError(
                    f"subset {i} has size {len(s)}, expected {self.subset_size}"
                )
            if any(v < 0 for v in s):
                raise ValueError("subset elements must be nonnegative")
        for i in range(len(subsets)):
            for j in range(i + 1, len(subsets)):
                inter = len(subsets[i] & subsets[j])
                if not inter < self.overlap_cap:
                    raise ValueError(
                        f"subsets {i} and {j} share {inter} elements, "
                        f"not below the cap {self.overlap_cap!r}"
                    )

    @property
    def size(self) -> int:
        return len(self.subsets)


@dataclass(frozen=True)
class FamilyBuild:
    family: SetFamily
    complete: bool
    target_size: int
    attempts: int


def build_set_family(params: AdParams, seed: int,
                     max_attempts: int | None = None) -> FamilyBuild:
    """Rejection-sample a nearly-disjoint family of the guaranteed size.

    Candidates are uniform subsets of {0..M-1} of size floor(tau*M),
    kept when every pairwise intersection stays strictly below
    kappa*floor(tau*M).  An incomplete build is returned as such, not
    raised: the count floor(e^(tau*M)/(M*e)) is guaranteed to exist,
    but rejection sampling is only expected to find it.  For small M
    that guaranteed count can be zero even though admissible subsets
    exist, so at least one subset is always requested.
    """
    size = params.subset_size
    if size < 1:
        raise ValueError(
            f"floor(tau*M) = 0: no subsets of positive size exist "
            f"for M={params.M}, tau={params.tau}"
        )
    target = max(params.family_size, 1)
    cap = float(params.kappa) * size
    if max_attempts is None:
        max_attempts = 200 * max(target, 1) + 1000
    gen = stream(seed, 0)
    chosen: list[frozenset] = []
    attempts = 0
    while len(chosen) < target and attempts < max_attempts:
        attempts += 1
        cand = frozenset(int(v) for v in
                         gen.choice(params.M, size=size, replace=False))
        if all(len(cand & s) < cap for s in chosen):
            chosen.append(cand)
    if not chosen:
        raise RetriesExhausted(
            f"no admissible subset found in {attempts} attempts", attempts)
    family = SetFamily(tuple(chosen), size, cap)
    return FamilyBuild(family, len(chosen) >= target, target, attempts)


@dataclass(frozen=True)
class SelectionParams:
    """Screening parameters for the codeword selection step."""

    alpha: float
    alpha_prime: float
    beta: float
    beta_prime: float
    tau: float
    kappa: float
    M: int
    C: float

    def __post_init__(self):
        for name in ("alpha", "alpha_prime", "beta", "beta_prime"):
            if getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must exceed 1")
        if 1.0 / self.alpha + 1.0 / self.alpha_prime >= 1.0:
            raise ValueError("need 1/alpha + 1/alpha_prime < 1")
        if self.gamma <= 0.0:
            raise ValueError("need 1 - 1/beta - 1/beta_prime > 0")
        _check_growth(self.tau, self.kappa)
        if self.M < 1:
            raise ValueError("M must be positive")
        if self.C <= 0:
            raise ValueError("C must be positive")

    @property
    def gamma(self) -> float:
        return 1.0 - 1.0 / self.beta - 1.0 / self.beta_prime

    @property
    def m_prime(self) -> int:
        return int(math.ceil(self.M / self.gamma))


@dataclass(frozen=True)
class Selection:
    """Screened codewords with their measured tail masses."""

    codewords: tuple[int, ...]
    miss_values: tuple[float, ...]
    union_values: tuple[float, ...]
    miss_bound: float
    union_bound: float
    feasibility_lhs: float
    feasible: bool
    attempts: int


def _level_sets(W: Channel, p: Distribution, C: float) -> np.ndarray:
    # row x is the indicator of {y : W_x(y) > C * W_p(y)}; outputs with
    # W_p(y) = 0 but W_x(y) > 0 count as exceeding any threshold
    wp = output_distribution(W, p).probs
    return W.rows > C * wp


def select_codewords(W: Channel, p: Distribution, params: SelectionParams,
                     seed: int, max_retries: int = 100) -> Selection:
    """Draw and screen candidates until M distinct codewords pass.

    Attempt k draws ceil(M/gamma) candidates i.i.d. from p on the
    (seed, k) stream and keeps those whose own miss mass and whose
    overlap with the other candidates' level sets clear the
    alpha*beta / alpha_prime*beta_prime thresholds.  Refused up front
    when beta times the average miss mass reaches 1, since screening
    can then never succeed.
    """
    miss_avg = 1.0 - tail_pair(p, W, params.C).delta
    if params.beta * miss_avg >= 1.0:
        raise InfeasibleParams(
            f"beta * E_p W_x(ratio <= C) = {params.beta * miss_avg!r} >= 1: "
            "screening cannot succeed"
        )
    m_prime = params.m_prime
    miss_bound = params.alpha * params.beta * miss_avg
    union_bound = params.alpha_prime * params.beta_prime * m_prime / params.C
    feasibility_lhs = (params.beta * miss_avg
                       + params.alpha_prime * params.beta_prime
                       * m_prime / params.C)
    level = _level_sets(W, p, params.C)
    rows = W.rows

    for attempt in range(max_retries):
        gen = stream(seed, attempt)
        xs = sample_indices(p.probs, gen.random(m_prime))
        over = level[xs]
        miss_i = 1.0 - np.sum(rows[xs] * over, axis=1)
        counts = over.sum(axis=0)
        union_i = np.array([
            float(np.sum(rows[x] * ((counts - over[i]) >= 1)))
            for i, x in enumerate(xs)
        ])
        good = (miss_i <= miss_bound) & (union_i <= union_bound)
        picked: list[int] = []
        seen: set[int] = set()
        for i in np.flatnonzero(good):
            x = int(xs[i])
            if x not in seen:
                seen.add(x)
                picked.append(x)
            if len(picked) == params.M:
                break
        if len(picked) < params.M:
            continue
        sel = np.array(picked)
        sel_level = level[sel]
        sel_counts = sel_level.sum(axis=0)
        final_union = tuple(
            float(np.sum(rows[x] * ((sel_counts - sel_level[i]) >= 1)))
            for i, x in enumerate(sel)
        )
        final_miss = tuple(
            float(1.0 - np.sum(rows[x] * sel_level[i]))
            for i, x in enumerate(sel)
        )
        return Selection(
            codewords=tuple(int(x) for x in sel),
            miss_values=final_miss,
            union_values=final_union,
            miss_bound=miss_bound,
            union_bound=union_bound,
            feasibility_lhs=feasibility_lhs,
            feasible=feasibility_lhs < 1.0,
            attempts=attempt + 1,
        )
    raise RetriesExhausted(
        f"no attempt out of {max_retries} yielded {params.M} distinct "
        "codewords passing both screens", max_retries)


@dataclass(frozen=True)
class IdCode:
    """Identification code: codewords plus a subset family over them.

    Message i is the uniform mixture of the codewords at the positions
    in subsets[i]; it is accepted on the union of those codewords'
    density-ratio level sets at threshold C.
    """

    codewords: tuple[int, ...]
    subsets: tuple[tuple[int, ...], ...]
    C: float

    def __post_init__(self):
        codewords = tuple(int(c) for c in self.codewords)
        object.__setattr__(self, "codewords", codewords)
        if len(set(codewords)) != len(codewords):
            raise ValueError("codewords must be distinct")
        subsets = tuple(tuple(sorted(int(v) for v in s)) for s in self.subsets)
        object.__setattr__(self, "subsets", subsets)
        if not subsets:
            raise ValueError("at least one message subset is required")
        for i, s in enumerate(subsets):
            if not s:
                raise ValueError(f"subset {i} is empty")
            if s[0] < 0 or s[-1] >= len(codewords):
                raise ValueError(
                    f"subset {i} references positions outside the codeword list"
                )
        if self.C <= 0:
            raise ValueError("C must be positive")

    @property
    def messages(self) -> int:
        return len(self.subsets)


def assemble_id_code(codewords, family: SetFamily, W: Channel,
                     p: Distribution, C: float) -> IdCode:
    """Bind a codeword list and a subset family into an identification code."""
    code = IdCode(tuple(codewords),
                  tuple(tuple(sorted(s)) for s in family.subsets), float(C))
    if max(code.codewords) >= W.input_size:
        raise ValueError("codeword index outside the input alphabet")
    if p.size != W.input_size:
        raise ValueError("distribution does not match channel input")
    return code


@dataclass(frozen=True)
class IdMetrics:
    """Worst-case identification errors of both kinds."""

    mu: float
    lam: float


def eval_id_code(code: IdCode, W: Channel, p: Distribution) -> IdMetrics:
    """Exact first-kind (mu) and second-kind (lam) error of the code.

    mu is the worst acceptance failure of a true message on its own
    region; lam is the worst acceptance of a wrong message's mixture.
    With a single message there is no confusion pair and lam is 0.
    """
    if max(code.codewords) >= W.input_size:
        raise ValueError("codeword index outside the input alphabet")
    level = _level_sets(W, p, code.C)
    cw = np.array(code.codewords)
    mixtures = []
    regions = []
    for s in code.subsets:
        idx = cw[list(s)]
        mixtures.append(W.rows[idx].mean(axis=0))
        regions.append(np.any(level[idx], axis=0))
    mu = 0.0
    lam = 0.0
    n = len(code.subsets)
    for i in range(n):
        mu = max(mu, float(1.0 - mixtures[i][regions[i]].sum()))
        for j in range(n):
            if j != i:
                lam = max(lam, float(mixtures[j][regions[i]].sum()))
    return IdMetrics(mu=mu, lam=lam)


def id_error_bounds(params: SelectionParams, p: Distribution,
                    W: Channel) -> tuple[float, float]:
    """Guaranteed (mu, lam) ceilings for codes built from these parameters."""
    miss_avg = 1.0 - tail_pair(p, W, params.C).delta
    mu_bound = params.alpha * params.beta * miss_avg
    lam_bound = (params.kappa + params.alpha_prime * params.beta_prime
                 * params.m_prime / params.C)
    return mu_bound, lam_bound


def asymptotic_schedule(n: int, R: float, R_prime: float) -> dict:
    """Blocklength-indexed parameter schedule from the asymptotic analysis.

    Returned for reference: its alpha_prime and beta_prime equal
    1/(n+2) < 1, which SelectionParams rejects, so this schedule
    cannot drive the finite construction directly.
    """
    if n < 1:
        raise ValueError("n must be positive")
    return {
        "M": math.ceil(math.exp(n * R)),
        "C": math.exp(n * R_prime),
        "alpha": 1.0 + 2.0 / n,
        "beta": 1.0 + 2.0 / n,
        "alpha_prime": 1.0 / (n + 2.0),
        "beta_prime": 1.0 / (n + 2.0),
        "tau": 1.0 / (n + 2.0),
        "kappa": _LOG2P1 / math.log(n) if n > 1 else math.inf,
    }


def save_id_code(code: IdCode, path) -> None:
    doc = {
        "codewords": list(code.codewords),
        "subsets": [list(s) for s in code.subsets],
        "C": code.C,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def load_id_code(path) -> IdCode:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    for field in ("codewords", "subsets", "C"):
        if field not in doc:
            raise ValueError(f"id code file {path} missing field '{field}'")
    return IdCode(tuple(doc["codewords"]),
                  tuple(tuple(s) for s in doc["subsets"]), float(doc["C"]))
