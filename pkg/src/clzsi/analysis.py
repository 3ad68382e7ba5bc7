"""Experiment harness: rate curves, match-count bound checks, and the
flag-variant advantage diagnostic, all emitted as byte-stable CSV.

Rates are reported over the full output, including the uncompressed
first block or first window, as total bits divided by symbols conveyed.
Uncertainty comes from independent-trial replication; every report row
carries the trial count and the standard error of its mean so that
pass/fail rules can be stated as multiples of the standard error.

All experiments are deterministic given their seed: trial seeds are
spawned from one root sequence, and CSV output is formatted to nine
significant digits, so identical seeds give byte-identical files.
Trials are independent and could be fanned out; aggregation is a plain
reduce.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .bitio import block_width
from .fixed_lz import CASE_XY_MATCH, FixedParseConfig, PhraseTrace, encode_fixed
from .matching import fuse
from .prefix_codes import prefix_width
from .sources import (
    MarkovModel,
    block_conditional_probability,
    conditional_entropy_rate,
    generate,
    rate_bound,
)
from .window_lz import WindowConfig, encode_window

__all__ = [
    "RateRow",
    "MatchBoundRow",
    "AdvantageRow",
    "run_rate_experiment",
    "kac_bound_check",
    "flag_advantage",
    "write_rate_csv",
    "write_match_bound_csv",
    "write_advantage_csv",
]


@dataclass(frozen=True)
class RateRow:
    """One grid point of a rate experiment.

    param is the block length for the fixed-parse algorithms and the
    window size for the sliding-window one; length is the block count or
    the total symbol count respectively.  bound carries the applicable
    theoretical reference (the finite-block rate ceiling, or the
    conditional entropy rate for the window algorithm); it is None where
    no reference applies.
    """

    algorithm: int
    param: int
    length: int
    q: float | None
    trials: int
    mean_rate: float
    std_error: float
    bound: float | None = None
    bound_std_error: float | None = None


@dataclass(frozen=True)
class MatchBoundRow:
    """Verdict for one (x block, y block) pair of the match-count bound.

    mean_count is the empirical mean of the number of side matches seen
    up to and including the first joint recurrence, over aligned
    occurrences of the pair; 1/conditional_prob is the ceiling it must
    stay under.  passed is None when the pair was never observed (or
    observed too rarely for a standard error).
    """

    x_block: str
    y_block: str
    conditional_prob: float
    observations: int
    mean_count: float | None
    std_error: float | None
    passed: bool | None


@dataclass(frozen=True)
class AdvantageRow:
    """Flag-variant diagnostic at one prefix of the block stream.

    case1_frequency is the share of blocks (after the first) where the
    plain variant found an in-code joint match, the one situation where
    the flag variant pays an extra bit.  threshold is the sufficient
    condition on that frequency for the flag variant to win on average;
    it is None when the two code widths coincide and the condition is
    undefined.  advantage_bits is plain minus flagged cumulative length,
    positive while the flag variant is ahead.
    """

    prefix_blocks: int
    case1_frequency: float
    threshold: float | None
    condition_holds: bool | None
    plain_bits: int
    flagged_bits: int
    advantage_bits: int


def _spawned_seeds(seed: int, count: int) -> list[np.random.SeedSequence]:
    return np.random.SeedSequence(seed).spawn(count)


def run_rate_experiment(
    algorithm: int,
    model: MarkovModel,
    grid: Sequence[tuple[int, int]],
    trials: int = 30,
    seed: int = 0,
    q: float | None = None,
    x_offset_bits: int | None = None,
    bound_samples: int = 4000,
) -> list[RateRow]:
    """Empirical rates over a (param, length) grid.

    For the fixed-parse algorithms (1, 2, 3) the grid rows are
    (block_len, num_blocks); rows sharing a block length are checkpoints
    of one encode per trial, since each block's codeword depends only on
    its past.  For algorithm 4 the rows are (window, total_symbols) and
    each is encoded separately.  q is a label recorded in the rows.
    """
    if algorithm in (1, 2, 3):
        return _fixed_rate_rows(
            algorithm, model, grid, trials, seed, q, x_offset_bits, bound_samples
        )
    if algorithm == 4:
        return _window_rate_rows(algorithm, model, grid, trials, seed, q)
    raise ValueError("algorithm must be 1, 2, 3, or 4")


def _fixed_rate_rows(
    algorithm, model, grid, trials, seed, q, x_offset_bits, bound_samples
) -> list[RateRow]:
    by_param: dict[int, list[int]] = {}
    for param, length in grid:
        by_param.setdefault(int(param), []).append(int(length))
    rows: list[RateRow] = []
    seeds = _spawned_seeds(seed, len(by_param) * trials)
    for p_idx, (block_len, lengths) in enumerate(sorted(by_param.items())):
        lengths = sorted(set(lengths))
        n_max = lengths[-1]
        cfg = FixedParseConfig(
            block_len,
            n_max,
            algorithm,
            model.x_alphabet,
            model.y_alphabet,
            x_offset_bits if algorithm == 2 else None,
        )
        per_checkpoint = np.empty((trials, len(lengths)))
        for trial in range(trials):
            x, y = generate(model, block_len * n_max, seeds[p_idx * trials + trial])
            _, traces = encode_fixed(x, y, cfg)
            cumulative = np.cumsum([t.bits for t in traces])
            for c, n in enumerate(lengths):
                per_checkpoint[trial, c] = cumulative[n - 1] / (n * block_len)
        bound = rate_bound(model, block_len, samples=bound_samples, seed=seed)
        for c, n in enumerate(lengths):
            rates = per_checkpoint[:, c]
            rows.append(
                RateRow(
                    algorithm=algorithm,
                    param=block_len,
                    length=n,
                    q=q,
                    trials=trials,
                    mean_rate=float(rates.mean()),
                    std_error=_std_error(rates),
                    bound=bound.value,
                    bound_std_error=bound.std_error,
                )
            )
    return rows


def _window_rate_rows(algorithm, model, grid, trials, seed, q) -> list[RateRow]:
    floor = conditional_entropy_rate(model, seed=seed)
    rows: list[RateRow] = []
    seeds = _spawned_seeds(seed, len(grid) * trials)
    for g_idx, (window, total) in enumerate(grid):
        cfg = WindowConfig(int(window), int(total), model.x_alphabet, model.y_alphabet)
        rates = np.empty(trials)
        for trial in range(trials):
            x, y = generate(model, int(total), seeds[g_idx * trials + trial])
            stream, _ = encode_window(x, y, cfg)
            rates[trial] = stream.bits_written / total
        rows.append(
            RateRow(
                algorithm=algorithm,
                param=int(window),
                length=int(total),
                q=q,
                trials=trials,
                mean_rate=float(rates.mean()),
                std_error=_std_error(rates),
                bound=floor.value,
                bound_std_error=floor.std_error,
            )
        )
    return rows


def _std_error(values: np.ndarray) -> float:
    if values.size < 2:
        return 0.0
    return float(values.std(ddof=1) / np.sqrt(values.size))


def _previous_occurrence(keys: np.ndarray) -> np.ndarray:
    """For each position, the previous position holding the same key, else -1."""
    order = np.argsort(keys, kind="stable")
    sorted_keys = keys[order]
    prev = np.full(keys.size, -1, dtype=np.int64)
    same = np.r_[False, sorted_keys[1:] == sorted_keys[:-1]]
    prev[order[same]] = order[np.flatnonzero(same) - 1]
    return prev


def _occurrence_rank(keys: np.ndarray) -> np.ndarray:
    """For each position, how many earlier positions hold the same key."""
    order = np.argsort(keys, kind="stable")
    sorted_keys = keys[order]
    boundary = np.r_[True, sorted_keys[1:] != sorted_keys[:-1]]
    run_id = np.cumsum(boundary) - 1
    run_start = np.flatnonzero(boundary)
    rank = np.arange(keys.size) - run_start[run_id]
    out = np.empty(keys.size, dtype=np.int64)
    out[order] = rank
    return out


def _gram_keys(symbols: np.ndarray, alphabet: int, block_len: int) -> np.ndarray:
    if alphabet**block_len > 1 << 62:
        raise ValueError("block too wide to enumerate patterns exactly")
    windows = np.lib.stride_tricks.sliding_window_view(symbols, block_len)
    powers = alphabet ** np.arange(block_len - 1, -1, -1, dtype=np.int64)
    return windows.astype(np.int64) @ powers


def kac_bound_check(
    model: MarkovModel,
    block_len: int,
    total_symbols: int = 1_000_000,
    seed: int = 0,
    stride: int | None = None,
) -> list[MatchBoundRow]:
    """Empirical check of the conditional Kac bound, per block pair.

    Simulates one long realization, measures at aligned origins (every
    `stride` positions, default the block length) the number of side
    matches up to and including the most recent joint recurrence, and
    compares the per-pair empirical mean against the reciprocal of the
    exact conditional block probability.  Origins whose past holds no
    joint recurrence are censored rather than guessed, which can only
    pull the mean down, never excuse a failure.

    A pair passes when mean <= 1/P + 3 standard errors; pairs with too
    few observations for a standard error are flagged as skipped
    (passed None).
    """
    stride = block_len if stride is None else stride
    if (model.x_alphabet * model.y_alphabet) ** block_len > 1 << 16:
        raise ValueError("block_len too large to tabulate every block pair")
    x, y = generate(model, total_symbols, seed)
    z = fuse(x, y)
    zkeys = _gram_keys(z.symbols, z.alphabet_size, block_len)
    ykeys = _gram_keys(y.symbols, y.alphabet_size, block_len)
    prev_joint = _previous_occurrence(zkeys)
    side_rank = _occurrence_rank(ykeys)

    origins = np.arange(0, zkeys.size, stride)
    prev = prev_joint[origins]
    found = prev >= 0
    counts = side_rank[origins[found]] - side_rank[prev[found]]
    patterns = zkeys[origins[found]]

    pair_alpha = z.alphabet_size
    rows: list[MatchBoundRow] = []
    totals = np.bincount(patterns, weights=None, minlength=pair_alpha**block_len)
    sums = np.bincount(patterns, weights=counts, minlength=pair_alpha**block_len)
    sq_sums = np.bincount(
        patterns, weights=counts.astype(np.float64) ** 2, minlength=pair_alpha**block_len
    )
    for key in range(pair_alpha**block_len):
        x_block, y_block = _split_pattern(key, model, block_len)
        p = block_conditional_probability(model, x_block, y_block)
        n_obs = int(totals[key])
        if n_obs < 2:
            rows.append(
                MatchBoundRow(
                    _block_str(x_block), _block_str(y_block), p, n_obs, None, None, None
                )
            )
            continue
        mean = sums[key] / n_obs
        var = max(0.0, (sq_sums[key] - n_obs * mean**2) / (n_obs - 1))
        se = float(np.sqrt(var / n_obs))
        passed = bool(mean <= 1.0 / p + 3.0 * se) if p > 0 else False
        rows.append(
            MatchBoundRow(
                _block_str(x_block), _block_str(y_block), p, n_obs, float(mean), se, passed
            )
        )
    return rows


def _split_pattern(key: int, model: MarkovModel, block_len: int) -> tuple[list[int], list[int]]:
    pair_alpha = model.x_alphabet * model.y_alphabet
    xs, ys = [], []
    for _ in range(block_len):
        key, digit = divmod(key, pair_alpha)
        xs.append(digit // model.y_alphabet)
        ys.append(digit % model.y_alphabet)
    # digits come out least significant first; keys are big-endian
    return xs[::-1], ys[::-1]


def _block_str(block: Iterable[int]) -> str:
    return "".join(str(int(s)) for s in block)


def flag_advantage(
    plain_traces: Sequence[PhraseTrace],
    flagged_traces: Sequence[PhraseTrace],
    block_bits: int,
    x_offset_bits: int,
    checkpoints: Sequence[int] | None = None,
) -> list[AdvantageRow]:
    """Compare the plain and flag variants phrase by phrase.

    Both trace lists must come from the same input pair.  For each
    checkpoint prefix, reports the frequency of the case where the flag
    variant pays its extra bit, the sufficient-condition threshold on
    that frequency (None when the code widths tie and the condition is
    undefined), and the realized cumulative length difference.
    """
    if len(plain_traces) != len(flagged_traces):
        raise ValueError("trace lists must describe the same block stream")
    width_gap = prefix_width(block_bits) - prefix_width(x_offset_bits)
    threshold = None if width_gap == 0 else 1.0 - 1.0 / width_gap
    plain_cum = np.cumsum([t.bits for t in plain_traces])
    flag_cum = np.cumsum([t.bits for t in flagged_traces])
    case1 = np.cumsum([1 if t.case == CASE_XY_MATCH else 0 for t in plain_traces])
    total = len(plain_traces)
    if checkpoints is None:
        checkpoints = range(2, total + 1)
    rows: list[AdvantageRow] = []
    for n in checkpoints:
        if not 2 <= n <= total:
            raise ValueError(f"checkpoint {n} outside [2, {total}]")
        freq = case1[n - 1] / (n - 1)
        rows.append(
            AdvantageRow(
                prefix_blocks=n,
                case1_frequency=float(freq),
                threshold=threshold,
                condition_holds=None if threshold is None else bool(freq <= threshold),
                plain_bits=int(plain_cum[n - 1]),
                flagged_bits=int(flag_cum[n - 1]),
                advantage_bits=int(plain_cum[n - 1] - flag_cum[n - 1]),
            )
        )
    return rows


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".9g")


def _write_csv(target, header: list[str], rows: Iterable[tuple]) -> None:
    own = isinstance(target, (str, bytes)) or hasattr(target, "__fspath__")
    handle = open(target, "w", newline="") if own else target
    try:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
    finally:
        if own:
            handle.close()


def write_rate_csv(rows: Sequence[RateRow], target) -> None:
    _write_csv(
        target,
        [
            "algorithm",
            "param",
            "length",
            "q",
            "trials",
            "mean_rate",
            "std_error",
            "bound",
            "bound_std_error",
        ],
        (
            (
                r.algorithm,
                r.param,
                r.length,
                r.q,
                r.trials,
                r.mean_rate,
                r.std_error,
                r.bound,
                r.bound_std_error,
            )
            for r in rows
        ),
    )


def write_match_bound_csv(rows: Sequence[MatchBoundRow], target) -> None:
    _write_csv(
        target,
        [
            "x_block",
            "y_block",
            "conditional_prob",
            "bound",
            "observations",
            "mean_count",
            "std_error",
            "passed",
        ],
        (
            (
                r.x_block,
                r.y_block,
                r.conditional_prob,
                (1.0 / r.conditional_prob) if r.conditional_prob > 0 else None,
                r.observations,
                r.mean_count,
                r.std_error,
                r.passed,
            )
            for r in rows
        ),
    )


def write_advantage_csv(rows: Sequence[AdvantageRow], target) -> None:
    _write_csv(
        target,
        [
            "prefix_blocks",
            "case1_frequency",
            "threshold",
            "condition_holds",
            "plain_bits",
            "flagged_bits",
            "advantage_bits",
        ],
        (
            (
                r.prefix_blocks,
                r.case1_frequency,
                r.threshold,
                r.condition_holds,
                r.plain_bits,
                r.flagged_bits,
                r.advantage_bits,
            )
            for r in rows
        ),
    )
