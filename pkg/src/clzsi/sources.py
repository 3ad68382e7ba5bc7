"""Joint Markov source model, sequence generation, and entropy estimates.

The model is a finite-state chain whose states are (x, y) symbol pairs;
state s maps to x = s // y_alphabet, y = s % y_alphabet.  The transition
matrix is column-stochastic: entry [next, current] is the probability of
moving to `next` from `current`, so columns sum to one.

Entropy quantities:

* the joint rate H(X, Y) is exact for a Markov chain (stationary-weighted
  column entropies);
* the side rate H(Y) has no closed form because Y alone is a hidden-state
  process; it is bracketed by the classic filtering sandwich
  H(Y_t | past Y, first state) <= H(Y) <= H(Y_t | past Y), both sides
  estimated by Monte Carlo over simulated paths with an exact forward
  recursion per path;
* the conditional rate H(X | Y) is the difference of the two;
* block conditional entropies H(X block | Y block) are Monte Carlo means
  of exactly computed per-sample conditionals.

Generation and estimation are deterministic given their seeds; trials
are independent and could be farmed out per seed.  Model objects are
immutable after construction.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .bitio import block_width
from .matching import SymbolSequence
from .prefix_codes import prefix_width

__all__ = [
    "MarkovModel",
    "PairedSource",
    "EntropyEstimate",
    "correlated_binary_model",
    "generate",
    "stationary_distribution",
    "joint_entropy_rate",
    "side_entropy_rate",
    "conditional_entropy_rate",
    "block_conditional_entropy",
    "block_conditional_probability",
    "rate_bound",
]

_METHODS = ("exact_markov", "monte_carlo", "sandwich")


@dataclass(frozen=True)
class MarkovModel:
    """Column-stochastic chain over (x, y) pair states."""

    transition: np.ndarray
    x_alphabet: int = 2
    y_alphabet: int = 2

    def __post_init__(self) -> None:
        t = np.asarray(self.transition, dtype=np.float64)
        states = self.x_alphabet * self.y_alphabet
        if t.shape != (states, states):
            raise ValueError(f"transition must be {states}x{states}")
        if (t < 0).any():
            raise ValueError("transition probabilities must be nonnegative")
        if np.abs(t.sum(axis=0) - 1.0).max() > 1e-12:
            raise ValueError("transition columns must sum to 1")
        t = t.copy()
        t.flags.writeable = False
        object.__setattr__(self, "transition", t)

    @property
    def state_count(self) -> int:
        return self.x_alphabet * self.y_alphabet

    def state_of(self, x: int, y: int) -> int:
        return x * self.y_alphabet + y

    def split_states(self, states: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return states // self.y_alphabet, states % self.y_alphabet


class PairedSource(NamedTuple):
    x: SymbolSequence
    y: SymbolSequence


@dataclass(frozen=True)
class EntropyEstimate:
    """An entropy or rate figure in bits per symbol with its uncertainty."""

    value: float
    std_error: float
    method: str

    def __post_init__(self) -> None:
        if self.std_error < 0:
            raise ValueError("std_error must be nonnegative")
        if self.method not in _METHODS:
            raise ValueError(f"method must be one of {_METHODS}")


def correlated_binary_model(q: float) -> MarkovModel:
    """Four-state joint binary chain with persistence q.

    From an agreeing pair the chain stays on that same pair with
    probability q and spreads (1-q)/3 over the other three states; from
    a disagreeing pair the next state is uniform.  q = 0.25 collapses to
    i.i.d. uniform pairs; larger q couples x to y more tightly.
    """
    if not 0.0 <= q <= 1.0:
        raise ValueError("q must lie in [0, 1]")
    r = (1.0 - q) / 3.0
    transition = np.array(
        [
            [q, 0.25, 0.25, r],
            [r, 0.25, 0.25, r],
            [r, 0.25, 0.25, r],
            [r, 0.25, 0.25, q],
        ]
    )
    return MarkovModel(transition)


def stationary_distribution(
    model: MarkovModel, tol: float = 1e-12, max_iterations: int = 200_000
) -> np.ndarray:
    """Fixed point of the transition map by power iteration.

    Iterates until the residual max|Mv - v| drops below tol; raises
    ArithmeticError if the cap is hit first (possible for periodic or
    nearly degenerate chains).
    """
    v = np.full(model.state_count, 1.0 / model.state_count)
    for _ in range(max_iterations):
        w = model.transition @ v
        w /= w.sum()
        if np.abs(w - v).max() < tol:
            return w
        v = w
    raise ArithmeticError(f"power iteration did not reach tol={tol}")


def generate(model: MarkovModel, length: int, seed: int) -> PairedSource:
    """Draw a stationary path of the chain and split it into (x, y).

    The initial state comes from the stationary distribution, so every
    window of the output has the stationary law.  Deterministic per seed.
    """
    if length < 1:
        raise ValueError("length must be positive")
    rng = np.random.default_rng(seed)
    pi = stationary_distribution(model)
    states = _walk(model, pi, length, rng)
    xs, ys = model.split_states(states)
    return PairedSource(
        SymbolSequence(model.x_alphabet, xs), SymbolSequence(model.y_alphabet, ys)
    )


def _walk(model: MarkovModel, pi: np.ndarray, length: int, rng) -> np.ndarray:
    last = model.state_count - 1
    cum = np.cumsum(model.transition, axis=0)
    thresholds = tuple(tuple(cum[:, c]) for c in range(model.state_count))
    # initial state first, so a longer walk extends a shorter same-seed walk
    s = int(rng.choice(model.state_count, p=pi))
    u = rng.random(length)
    states = np.empty(length, dtype=np.int64)
    states[0] = s
    for t in range(1, length):
        ut = u[t]
        col = thresholds[s]
        s = 0
        while s < last and col[s] <= ut:
            s += 1
        states[t] = s
    return states


def _walk_batch(model: MarkovModel, pi: np.ndarray, count: int, length: int, rng) -> np.ndarray:
    """count independent stationary paths as a (count, length) state array."""
    cum = np.cumsum(model.transition, axis=0)
    states = np.empty((count, length), dtype=np.int64)
    s = rng.choice(model.state_count, size=count, p=pi)
    states[:, 0] = s
    for t in range(1, length):
        u = rng.random(count)
        s = np.minimum((u[None, :] > cum[:, s]).sum(axis=0), model.state_count - 1)
        states[:, t] = s
    return states


def _column_entropies(transition: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(transition > 0, -transition * np.log2(transition), 0.0)
    return terms.sum(axis=0)


def joint_entropy_rate(model: MarkovModel) -> EntropyEstimate:
    """Exact H(X, Y) in bits per symbol: stationary-weighted column entropies."""
    pi = stationary_distribution(model)
    value = float(pi @ _column_entropies(model.transition))
    return EntropyEstimate(value, 0.0, "exact_markov")


def _filter_log_losses(
    model: MarkovModel, states: np.ndarray, burn_in: int, known_start: bool
) -> np.ndarray:
    """Per-path mean of -log2 P(y_t | conditioning) over the tail steps.

    known_start=False starts the forward filter from the stationary
    prior (upper-bound terms); True starts it at the true first state
    (lower-bound terms).  Exact given the path; no sampling inside.
    """
    trials, n = states.shape
    y_of_state = np.arange(model.state_count) % model.y_alphabet
    y_obs = states % model.y_alphabet
    if known_start:
        alpha = np.zeros((trials, model.state_count))
        alpha[np.arange(trials), states[:, 0]] = 1.0
    else:
        pi = stationary_distribution(model)
        alpha = pi[None, :] * (y_of_state[None, :] == y_obs[:, 0][:, None])
        alpha /= alpha.sum(axis=1, keepdims=True)
    t_mat = model.transition.T
    losses = np.zeros(trials)
    counted = 0
    for t in range(1, n):
        pred = alpha @ t_mat
        pred *= y_of_state[None, :] == y_obs[:, t][:, None]
        p = pred.sum(axis=1)
        if (p <= 0).any() or not np.isfinite(p).all():
            raise ArithmeticError("forward recursion produced a non-positive probability")
        alpha = pred / p[:, None]
        if t >= burn_in:
            losses -= np.log2(p)
            counted += 1
    return losses / counted


def side_entropy_rate(
    model: MarkovModel,
    n: int = 4000,
    trials: int = 600,
    seed: int = 0,
    burn_in: int = 100,
) -> EntropyEstimate:
    """Sandwich estimate of H(Y), the hidden-state marginal rate.

    Returns the midpoint of the Monte Carlo upper and lower brackets;
    std_error is the bracket half-width plus the larger Monte Carlo
    standard error, a deliberately conservative figure.
    """
    if burn_in >= n - 1:
        raise ValueError("burn_in leaves no tail steps")
    rng = np.random.default_rng(seed)
    pi = stationary_distribution(model)
    states = _walk_batch(model, pi, trials, n, rng)
    upper = _filter_log_losses(model, states, burn_in, known_start=False)
    lower = _filter_log_losses(model, states, burn_in, known_start=True)
    u_mean = float(upper.mean())
    l_mean = float(lower.mean())
    se = max(
        float(upper.std(ddof=1) / np.sqrt(trials)),
        float(lower.std(ddof=1) / np.sqrt(trials)),
    )
    value = 0.5 * (u_mean + l_mean)
    half_width = max(0.0, 0.5 * (u_mean - l_mean))
    return EntropyEstimate(value, half_width + se, "sandwich")


def conditional_entropy_rate(
    model: MarkovModel,
    n: int = 4000,
    trials: int = 600,
    seed: int = 0,
    burn_in: int = 100,
) -> EntropyEstimate:
    """H(X | Y) = H(X, Y) - H(Y), joint part exact, side part sandwiched."""
    joint = joint_entropy_rate(model)
    side = side_entropy_rate(model, n=n, trials=trials, seed=seed, burn_in=burn_in)
    return EntropyEstimate(joint.value - side.value, side.std_error, "sandwich")


def _log2_side_prob_batch(model: MarkovModel, y_obs: np.ndarray) -> np.ndarray:
    """Exact log2 P(y block) for each row of y_obs via the forward recursion."""
    rows, length = y_obs.shape
    pi = stationary_distribution(model)
    y_of_state = np.arange(model.state_count) % model.y_alphabet
    alpha = pi[None, :] * (y_of_state[None, :] == y_obs[:, 0][:, None])
    total = alpha.sum(axis=1)
    if (total <= 0).any():
        raise ArithmeticError("side block has probability zero under the model")
    log2p = np.log2(total)
    alpha = alpha / total[:, None]
    t_mat = model.transition.T
    for t in range(1, length):
        pred = alpha @ t_mat
        pred *= y_of_state[None, :] == y_obs[:, t][:, None]
        total = pred.sum(axis=1)
        if (total <= 0).any():
            raise ArithmeticError("side block has probability zero under the model")
        log2p += np.log2(total)
        alpha = pred / total[:, None]
    return log2p


def _log2_joint_prob_batch(model: MarkovModel, states: np.ndarray) -> np.ndarray:
    """Exact log2 P(state path) per row; -inf for impossible paths."""
    pi = stationary_distribution(model)
    with np.errstate(divide="ignore"):
        log2p = np.log2(pi[states[:, 0]])
        if states.shape[1] > 1:
            step = model.transition[states[:, 1:], states[:, :-1]]
            log2p = log2p + np.log2(step).sum(axis=1)
    return log2p


def block_conditional_probability(model: MarkovModel, x_block, y_block) -> float:
    """Exact P(X block = x | Y block = y) under the stationary chain.

    The numerator is the state-path probability, the denominator the
    forward-recursion marginal of the side block.
    """
    x_arr = np.asarray(list(x_block), dtype=np.int64)
    y_arr = np.asarray(list(y_block), dtype=np.int64)
    if x_arr.shape != y_arr.shape or x_arr.ndim != 1 or x_arr.size == 0:
        raise ValueError("blocks must be equal-length nonempty vectors")
    states = (x_arr * model.y_alphabet + y_arr)[None, :]
    log2_joint = _log2_joint_prob_batch(model, states)[0]
    if not np.isfinite(log2_joint):
        return 0.0
    log2_side = _log2_side_prob_batch(model, y_arr[None, :])[0]
    return float(2.0 ** (log2_joint - log2_side))


def block_conditional_entropy(
    model: MarkovModel, block_len: int, samples: int = 4000, seed: int = 0
) -> EntropyEstimate:
    """Monte Carlo H(X block | Y block): mean of exact per-sample scores.

    Each sample draws one stationary block and scores
    -log2 P(x block | y block) exactly, so the only error is sampling
    noise, reported as the standard error of the mean.
    """
    if block_len < 1:
        raise ValueError("block_len must be positive")
    if samples < 2:
        raise ValueError("need at least two samples for a standard error")
    rng = np.random.default_rng(seed)
    pi = stationary_distribution(model)
    states = _walk_batch(model, pi, samples, block_len, rng)
    y_obs = states % model.y_alphabet
    scores = _log2_side_prob_batch(model, y_obs) - _log2_joint_prob_batch(model, states)
    if not np.isfinite(scores).all():
        raise ArithmeticError("sampled block with zero probability")
    value = float(scores.mean())
    se = float(scores.std(ddof=1) / np.sqrt(samples))
    return EntropyEstimate(value, se, "monte_carlo")


def rate_bound(
    model: MarkovModel, block_len: int, samples: int = 4000, seed: int = 0
) -> EntropyEstimate:
    """Finite-block rate ceiling for the fixed-parse codec family.

    The per-block code header costs ceil(log2(1+k)) bits for
    k = ceil(block_len * log2 alphabet); on top of that the match ranks
    cannot beat the block conditional entropy.  Dividing by the block
    length gives the bits-per-symbol asymptote the rate curves settle
    under as the number of blocks grows.
    """
    k = block_width(model.x_alphabet, block_len)
    est = block_conditional_entropy(model, block_len, samples=samples, seed=seed)
    value = prefix_width(k) / block_len + est.value / block_len
    return EntropyEstimate(value, est.std_error / block_len, "monte_carlo")
