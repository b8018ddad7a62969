"""Bias-based binary fingerprinting codes (Tardos-style) with score tracing.

A codebook draws a bias p_j per column from the arcsine density
1/(pi*sqrt(p(1-p))) truncated to [t, 1-t] with cutoff t = 1/(300 n),
then gives user i the word W[i, j] ~ Bernoulli(p_j) independently.
Code length is ell = ceil(a * n^2 * ln(n / eps_fp)) with a = 100 by
default (a = 20 is usable for quick desk runs at visibly weaker error
rates).

Tracing scores every user against a suspect word w' and accuses the top
scorer iff it clears Z = 20 * n * ln(n / eps_fp):

    column j contributes, when w'_j = 1:
        +sqrt((1-p_j)/p_j)  if W[i,j] = 1
        -sqrt(p_j/(1-p_j))  if W[i,j] = 0
    and 0 when w'_j = 0.

Against any coalition that only ever outputs bits it has seen in the
column (the feasible words), an innocent user is accused with
probability at most eps_fp while the coalition is caught with high
probability.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import FileFormatError, InputShapeError
from .seeds import stream

MAJORITY = "MAJORITY"
MINORITY = "MINORITY"
RANDOM_FEASIBLE = "RANDOM_FEASIBLE"
COPY_ONE = "COPY_ONE"

STRATEGIES = (MAJORITY, MINORITY, RANDOM_FEASIBLE, COPY_ONE)

DEFAULT_LENGTH_CONSTANT = 100.0


def code_length(n: int, eps_fp: float, a: float = DEFAULT_LENGTH_CONSTANT) -> int:
    return math.ceil(a * n * n * math.log(n / eps_fp))


def accusation_threshold(n: int, eps_fp: float) -> float:
    return 20.0 * n * math.log(n / eps_fp)


def bias_cutoff(n: int) -> float:
    return 1.0 / (300.0 * n)


@dataclass(frozen=True, eq=False)
class Codebook:
    """Tracer-side state: the words are distributed, the biases stay secret."""

    n: int
    ell: int
    eps_fp: float
    a: float
    cutoff: float
    threshold: float
    biases: np.ndarray  # (ell,) float64 in [cutoff, 1-cutoff]
    words: np.ndarray   # (n, ell) uint8


def _check_params(n: int, eps_fp: float) -> None:
    if n < 2:
        raise InputShapeError(f"codebooks need n >= 2 users, got {n}")
    if not 0.0 < eps_fp < 1.0:
        raise InputShapeError(f"eps_fp must be in (0,1), got {eps_fp}")


def fp_gen(
    n: int, eps_fp: float, rng: np.random.Generator, a: float = DEFAULT_LENGTH_CONSTANT
) -> Codebook:
    """Draw biases from the truncated arcsine density, then the word matrix."""
    _check_params(n, eps_fp)
    if a <= 0:
        raise InputShapeError(f"length constant must be positive, got {a}")
    ell = code_length(n, eps_fp, a)
    t = bias_cutoff(n)
    z = accusation_threshold(n, eps_fp)
    # p = sin^2(x) with x uniform maps to the arcsine density; truncating x
    # to [asin(sqrt(t)), pi/2 - asin(sqrt(t))] truncates p to [t, 1-t].
    xt = math.asin(math.sqrt(t))
    x = rng.uniform(xt, math.pi / 2.0 - xt, ell)
    biases = np.sin(x) ** 2
    np.clip(biases, t, 1.0 - t, out=biases)
    words = (rng.random((n, ell)) < biases).astype(np.uint8)
    return Codebook(n, ell, eps_fp, a, t, z, biases, words)


def _check_word(cb_ell: int, word: np.ndarray) -> np.ndarray:
    w = np.asarray(word, dtype=np.uint8)
    if w.shape != (cb_ell,):
        raise InputShapeError(f"word must be {cb_ell} bits, got shape {w.shape}")
    if w.size and w.max() > 1:
        raise InputShapeError("word entries must be bits")
    return w


def fp_scores(cb: Codebook, word: np.ndarray) -> np.ndarray:
    """Per-user accusation scores against a suspect word."""
    w = _check_word(cb.ell, word)
    p = cb.biases
    hit = np.sqrt((1.0 - p) / p)
    miss = -np.sqrt(p / (1.0 - p))
    return (cb.words * (hit - miss) + miss) @ w.astype(np.float64)


def fp_trace(cb: Codebook, word: np.ndarray) -> int | None:
    """Accuse the top scorer if it clears the threshold, else no one."""
    scores = fp_scores(cb, word)
    top = int(np.argmax(scores))
    return top if scores[top] > cb.threshold else None


def fp_feasible(coalition_words: np.ndarray, word: np.ndarray) -> bool:
    """Did every output bit appear in its column within the coalition?"""
    ws = np.asarray(coalition_words, dtype=np.uint8)
    if ws.ndim != 2:
        raise InputShapeError("coalition words must be a (|S|, ell) matrix")
    w = _check_word(ws.shape[1], word)
    return bool((ws == w[None, :]).any(axis=0).all())


def fp_critical(coalition_words: np.ndarray) -> np.ndarray:
    """Columns where the coalition is unanimous (sorted indices)."""
    ws = np.asarray(coalition_words, dtype=np.uint8)
    if ws.ndim != 2 or ws.shape[0] < 1:
        raise InputShapeError("coalition words must be a nonempty (|S|, ell) matrix")
    return np.flatnonzero((ws == ws[0]).all(axis=0))


def fp_adversary(
    coalition_words: np.ndarray, strategy: str, rng: np.random.Generator
) -> np.ndarray:
    """Forge a word from the coalition's view; always feasible.

    MAJORITY/MINORITY vote per column (ties to 1 and 0 respectively;
    critical columns are forced either way), RANDOM_FEASIBLE picks
    uniformly among the bits present, COPY_ONE replays one uniformly
    chosen member.
    """
    ws = np.asarray(coalition_words, dtype=np.uint8)
    if ws.ndim != 2 or ws.shape[0] < 1:
        raise InputShapeError("coalition words must be a nonempty (|S|, ell) matrix")
    c, ell = ws.shape
    ones = ws.sum(axis=0, dtype=np.int64)
    if strategy == MAJORITY:
        return (2 * ones >= c).astype(np.uint8)
    if strategy == MINORITY:
        unanimous = (ones == 0) | (ones == c)
        vote = (2 * ones < c).astype(np.uint8)
        return np.where(unanimous, ws[0], vote).astype(np.uint8)
    if strategy == RANDOM_FEASIBLE:
        unanimous = (ones == 0) | (ones == c)
        coin = rng.integers(0, 2, ell, dtype=np.uint8)
        return np.where(unanimous, ws[0], coin).astype(np.uint8)
    if strategy == COPY_ONE:
        return ws[int(rng.integers(c))].copy()
    raise InputShapeError(f"unknown adversary strategy {strategy!r}")


def run_code_experiment(
    n: int,
    eps_fp: float,
    strategy: str,
    trials: int,
    master_seed: int,
    coalition_size: int | None = None,
    a: float = DEFAULT_LENGTH_CONSTANT,
) -> dict:
    """Monte Carlo soundness/completeness rates for one adversary strategy.

    The coalition is users 0..|S|-1 (default |S| = n-1, the regime the
    tracing reduction cares about); everyone else is innocent.
    """
    if strategy not in STRATEGIES:
        raise InputShapeError(f"unknown adversary strategy {strategy!r}")
    if trials < 1:
        raise InputShapeError("need at least one trial")
    size = n - 1 if coalition_size is None else int(coalition_size)
    if not 1 <= size <= n:
        raise InputShapeError(f"coalition size must be in [1, {n}], got {size}")
    caught = innocent = none = infeasible = 0
    for t in range(trials):
        rng = stream(master_seed, "fpcode-bench", n, strategy, t)
        cb = fp_gen(n, eps_fp, rng, a=a)
        word = fp_adversary(cb.words[:size], strategy, rng)
        if not fp_feasible(cb.words[:size], word):
            infeasible += 1
        accused = fp_trace(cb, word)
        if accused is None:
            none += 1
        elif accused < size:
            caught += 1
        else:
            innocent += 1
    return {
        "n": n,
        "eps_fp": eps_fp,
        "a": a,
        "strategy": strategy,
        "trials": trials,
        "coalition_size": size,
        "ell": code_length(n, eps_fp, a),
        "coalition_accused_rate": caught / trials,
        "innocent_accused_rate": innocent / trials,
        "none_rate": none / trials,
        "infeasible_rate": infeasible / trials,
    }


def codebook_to_json(cb: Codebook) -> dict:
    return {
        "n": cb.n,
        "ell": cb.ell,
        "eps_fp": cb.eps_fp,
        "a": cb.a,
        "cutoff": cb.cutoff,
        "threshold": cb.threshold,
        "biases": cb.biases.tolist(),
        "words": [np.packbits(w).tobytes().hex() for w in cb.words],
    }


def adversary_view_json(cb: Codebook, coalition: list[int]) -> dict:
    """What a coalition legitimately sees: its own rows, nothing else."""
    for u in coalition:
        if not 0 <= u < cb.n:
            raise InputShapeError(f"no user {u} in an n={cb.n} codebook")
    return {
        "n": cb.n,
        "ell": cb.ell,
        "coalition": sorted(int(u) for u in coalition),
        "words": {
            str(u): np.packbits(cb.words[u]).tobytes().hex()
            for u in sorted(coalition)
        },
    }


def codebook_from_json(obj: dict) -> Codebook:
    try:
        n, ell = int(obj["n"]), int(obj["ell"])
        biases = np.asarray(obj["biases"], dtype=np.float64)
        words = np.zeros((n, ell), dtype=np.uint8)
        for u, hexrow in enumerate(obj["words"]):
            words[u] = np.unpackbits(
                np.frombuffer(bytes.fromhex(hexrow), dtype=np.uint8)
            )[:ell]
        cb = Codebook(
            n,
            ell,
            float(obj["eps_fp"]),
            float(obj["a"]),
            float(obj["cutoff"]),
            float(obj["threshold"]),
            biases,
            words,
        )
    except (KeyError, TypeError, ValueError) as e:
        raise FileFormatError(f"bad codebook JSON: {e}") from e
    if biases.shape != (ell,) or len(obj["words"]) != n:
        raise FileFormatError("codebook dimensions are inconsistent")
    return cb


def codebook_dumps(cb: Codebook) -> str:
    return json.dumps(codebook_to_json(cb), sort_keys=True, separators=(",", ":"))


def codebook_loads(text: str) -> Codebook:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as e:
        raise FileFormatError(f"codebook is not valid JSON: {e}") from e
    return codebook_from_json(obj)
