"""Shared pieces of the witness searches: result records and enumerators."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

import numpy as np

EXHAUSTIVE = "exhaustive"
LOCAL = "local"
ENGINES = (EXHAUSTIVE, LOCAL)


class CapExceeded(ValueError):
    """An exhaustive search would visit more candidates than allowed."""


@dataclass
class SearchResult:
    """Outcome of a search.

    ``value`` is the best defect found (for maximisations, the best score).
    With the exhaustive engine and ``success`` false, ``value`` is the
    certified optimum over the whole candidate space.
    """

    success: bool
    value: Fraction
    witness: Any
    engine: str
    seed: int | None = None
    exact: bool = True
    reason: str = ""
    details: dict = field(default_factory=dict)

    def __bool__(self):
        return self.success


def check_engine(engine):
    if engine not in ENGINES:
        raise ValueError(f"unknown engine {engine!r}; choose one of {ENGINES}")


def labeling_chunks(n, p, chunk=1 << 15, first_fixed=None):
    """Yield (start_rank, array) blocks of all labelings of n points with p symbols.

    Rows come in lexicographic order, each a length-n array of digits.
    With ``first_fixed`` set, only labelings whose first digit equals it.
    """
    free = n - 1 if first_fixed is not None and n > 0 else n
    total = p**free
    powers = p ** np.arange(free - 1, -1, -1, dtype=np.int64)
    for start in range(0, total, chunk):
        ranks = np.arange(start, min(total, start + chunk), dtype=np.int64)
        digits = (ranks[:, None] // powers[None, :]) % p
        if free != n:
            digits = np.concatenate(
                [np.full((len(ranks), 1), first_fixed, dtype=np.int64), digits], axis=1
            )
        yield start, digits


def integer_weights(weights):
    """Weights scaled to integers over their common denominator."""
    den = math.lcm(*(w.denominator for w in weights)) if weights else 1
    if den >= 1 << 55:
        raise OverflowError("common denominator too large for exact vectorised search")
    return np.array([int(w * den) for w in weights], dtype=np.int64), den


def best_of(candidates):
    """Pick (value, witness) with the smallest value, then smallest witness."""
    return min(candidates, key=lambda vw: (vw[0], tuple(vw[1])))


def minimize_labeling(n, p, batch_score, engine, seed=0, cap=None, restarts=8, stop_at=None):
    """Minimise an integer score over all labelings of n points with p symbols.

    ``batch_score`` maps an (R, n) digit array to R int64 scores. Returns
    (score, labeling tuple). The exhaustive engine checks the cap, scans
    in lexicographic order and keeps the first minimiser. The local engine
    runs seeded steepest descent over single-point changes with restarts,
    stopping early once the score is at most ``stop_at``.
    """
    check_engine(engine)
    if engine == EXHAUSTIVE:
        if cap is not None and p**n > cap:
            raise CapExceeded(f"{p}^{n} = {p ** n} labelings exceed the cap {cap}")
        best, arg = None, None
        for _, digits in labeling_chunks(n, p):
            scores = batch_score(digits)
            i = int(np.argmin(scores))
            if best is None or scores[i] < best:
                best, arg = int(scores[i]), tuple(int(d) for d in digits[i])
        return best, arg
    rng = random.Random(seed)
    best, arg = None, None
    for _ in range(max(1, restarts)):
        cur = np.array([rng.randrange(p) for _ in range(n)], dtype=np.int64)
        score = int(batch_score(cur[None, :])[0])
        while n and p > 1:
            moves = np.repeat(cur[None, :], n * (p - 1), axis=0)
            rows = np.arange(n * (p - 1))
            pos = rows // (p - 1)
            shift = rows % (p - 1) + 1
            moves[rows, pos] = (cur[pos] + shift) % p
            scores = batch_score(moves)
            i = int(np.argmin(scores))
            if scores[i] >= score:
                break
            cur, score = moves[i], int(scores[i])
        cand = (score, tuple(int(d) for d in cur))
        if best is None or cand < (best, arg):
            best, arg = cand
        if stop_at is not None and best <= stop_at:
            break
    return best, arg
