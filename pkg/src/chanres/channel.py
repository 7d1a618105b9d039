"""Finite-alphabet probability primitives.

Distributions are probability vectors and channels are row-stochastic
matrices ``W[x, y] = W_x(y)`` over finite alphabets.  Everything
downstream (tail functionals, exponent optimization, random-coding
simulation) is built on the operations in this module.

Conventions used throughout the package:

* all logarithms are natural, so divergences, rates and exponents are
  in nats;
* ``0 * log(0) == 0`` and ``0 * log(0/0) == 0``;
* probability vectors are validated on construction (nonnegative
  entries, total within 1e-12 of one) and then renormalized exactly
  once, so downstream code can rely on exact unit totals.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

SUM_TOL = 1e-12

DEFAULT_MAX_JOINT_STATES = 2 ** 24


class BudgetError(ValueError):
    """An exact enumeration would exceed the configured state cap."""


@dataclass(frozen=True)
class EnumerationBudget:
    """Cap on the number of joint states materialized by exact enumeration."""

    max_joint_states: int = DEFAULT_MAX_JOINT_STATES

    def __post_init__(self):
        if int(self.max_joint_states) < 1:
            raise ValueError("max_joint_states must be a positive integer")
        object.__setattr__(self, "max_joint_states", int(self.max_joint_states))

    def check(self, states: int, what: str) -> None:
        if states > self.max_joint_states:
            raise BudgetError(
                f"{what} needs {states} joint states, over the cap of "
                f"{self.max_joint_states}; rerun with max_joint_states >= {states}"
            )


DEFAULT_BUDGET = EnumerationBudget()


@dataclass(frozen=True, eq=False)
class Distribution:
    """Probability vector on a finite alphabet."""

    probs: np.ndarray

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=float)
        if probs.ndim != 1 or probs.size == 0:
            raise ValueError("distribution must be a non-empty vector")
        if np.any(probs < 0):
            raise ValueError("negative probability entry")
        total = float(probs.sum())
        if abs(total - 1.0) > SUM_TOL:
            raise ValueError(f"probabilities sum to {total!r}, not 1")
        probs = probs / total
        probs.flags.writeable = False
        object.__setattr__(self, "probs", probs)

    @property
    def size(self) -> int:
        return self.probs.size

    def support(self) -> np.ndarray:
        return np.flatnonzero(self.probs > 0)


@dataclass(frozen=True, eq=False)
class Channel:
    """Row-stochastic matrix; row x is the output law W_x."""

    rows: np.ndarray

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=float)
        if rows.ndim != 2 or rows.size == 0:
            raise ValueError("channel must be a non-empty matrix")
        if np.any(rows < 0):
            raise ValueError("negative channel entry")
        totals = rows.sum(axis=1)
        bad = np.flatnonzero(np.abs(totals - 1.0) > SUM_TOL)
        if bad.size:
            raise ValueError(
                f"channel row {bad[0]} sums to {totals[bad[0]]!r}, not 1"
            )
        rows = rows / totals[:, None]
        rows.flags.writeable = False
        object.__setattr__(self, "rows", rows)

    @property
    def input_size(self) -> int:
        return self.rows.shape[0]

    @property
    def output_size(self) -> int:
        return self.rows.shape[1]

    def row(self, x: int) -> np.ndarray:
        return self.rows[x]


def uniform(size: int) -> Distribution:
    return Distribution(np.full(size, 1.0 / size))


def point_mass(index: int, size: int) -> Distribution:
    probs = np.zeros(size)
    probs[index] = 1.0
    return Distribution(probs)


def bsc(crossover: float) -> Channel:
    """Binary symmetric channel with the given crossover probability."""
    if not 0.0 <= crossover <= 1.0:
        raise ValueError("crossover must lie in [0, 1]")
    w = float(crossover)
    return Channel(np.array([[1.0 - w, w], [w, 1.0 - w]]))


def identity_channel(size: int) -> Channel:
    return Channel(np.eye(size))


def constant_channel(row, input_size: int) -> Channel:
    """Channel whose rows are all equal, carrying no input information."""
    row = np.asarray(row, dtype=float)
    return Channel(np.tile(row, (input_size, 1)))


def output_distribution(W: Channel, p: Distribution) -> Distribution:
    """Mixture output law W_p(y) = sum_x p(x) W_x(y)."""
    if p.size != W.input_size:
        raise ValueError(
            f"distribution size {p.size} does not match input size {W.input_size}"
        )
    return Distribution(p.probs @ W.rows)


def product(W: Channel, n: int, budget: EnumerationBudget = DEFAULT_BUDGET) -> Channel:
    """n-fold memoryless product of W, materialized densely.

    Symbol order is little-endian: the first coordinate is the least
    significant digit of a product index, so it varies fastest as the
    index increases.
    """
    if n < 1:
        raise ValueError("n must be a positive integer")
    states = (W.input_size ** n) * (W.output_size ** n)
    budget.check(states, f"{n}-fold product channel")
    rows = W.rows
    for _ in range(n - 1):
        rows = np.kron(W.rows, rows)
    return Channel(rows)


def product_dist(p: Distribution, n: int,
                 budget: EnumerationBudget = DEFAULT_BUDGET) -> Distribution:
    """n-fold i.i.d. product of p, in the same little-endian symbol order."""
    if n < 1:
        raise ValueError("n must be a positive integer")
    budget.check(p.size ** n, f"{n}-fold product distribution")
    probs = p.probs
    for _ in range(n - 1):
        probs = np.kron(p.probs, probs)
    return Distribution(probs)


def variational_distance(p: Distribution, q: Distribution) -> float:
    """l1 distance d(p, q) = sum_y |p(y) - q(y)|, in [0, 2]."""
    if p.size != q.size:
        raise ValueError("dimension mismatch")
    return float(np.abs(p.probs - q.probs).sum())


def kl_divergence(p: Distribution, q: Distribution) -> float:
    """Divergence D(p||q) in nats; +inf when p has mass outside supp(q)."""
    if p.size != q.size:
        raise ValueError("dimension mismatch")
    mask = p.probs > 0
    pm = p.probs[mask]
    qm = q.probs[mask]
    if np.any(qm == 0):
        return math.inf
    val = float(np.sum(pm * (np.log(pm) - np.log(qm))))
    return max(val, 0.0)


def mutual_information(p: Distribution, W: Channel) -> float:
    """I(p;W) = E_p D(W_x || W_p)."""
    wp = output_distribution(W, p)
    total = 0.0
    for x in p.support():
        total += p.probs[x] * kl_divergence(Distribution(W.rows[x]), wp)
    return max(total, 0.0)


def dispersion_J(p: Distribution, W: Channel) -> float:
    """Half the variance of the information density log W_x(y) - log W_p(y)."""
    wp = output_distribution(W, p).probs
    second = 0.0
    for x in p.support():
        row = W.rows[x]
        mask = row > 0
        dens = np.log(row[mask]) - np.log(wp[mask])
        second += p.probs[x] * float(np.sum(row[mask] * dens ** 2))
    i_val = mutual_information(p, W)
    return max(0.5 * (second - i_val * i_val), 0.0)


def divergence_tail_check(p: Distribution, q: Distribution,
                          alpha: float) -> tuple[float, float]:
    """Both sides of D(p||q) + 1/e >= alpha * p{log p/q >= alpha}.

    Returns (lhs, rhs).  An infinite divergence makes the inequality
    vacuous and is reported as lhs = +inf.
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    lhs = kl_divergence(p, q) + 1.0 / math.e
    mass = 0.0
    for w in p.support():
        if q.probs[w] == 0:
            mass += p.probs[w]
        elif math.log(p.probs[w]) - math.log(q.probs[w]) >= alpha:
            mass += p.probs[w]
    return lhs, float(alpha) * mass


def load_channel(path) -> Channel:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    for field in ("input_size", "output_size", "rows"):
        if field not in doc:
            raise ValueError(f"channel file {path} missing field '{field}'")
    rows = np.asarray(doc["rows"], dtype=float)
    if rows.ndim != 2 or rows.shape != (doc["input_size"], doc["output_size"]):
        raise ValueError(
            f"channel file {path}: field 'rows' has shape {rows.shape}, "
            f"expected ({doc['input_size']}, {doc['output_size']})"
        )
    return Channel(rows)


def save_channel(W: Channel, path) -> None:
    doc = {
        "input_size": W.input_size,
        "output_size": W.output_size,
        "rows": [[float(v) for v in row] for row in W.rows],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def load_distribution(path) -> Distribution:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if "probs" not in doc:
        raise ValueError(f"distribution file {path} missing field 'probs'")
    return Distribution(np.asarray(doc["probs"], dtype=float))


def save_distribution(p: Distribution, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump({"probs": [float(v) for v in p.probs]}, fh, indent=2)
        fh.write("\n")
