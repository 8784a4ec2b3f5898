"""Monte Carlo block-coding trials against the strategy channel.

Codebooks are i.i.d. strategy sequences drawn from a team policy. Each trial
samples messages, a state sequence, and outputs, then decodes either by
joint typicality (every nonempty subset of the four per-letter variables
must have empirical log-likelihood within epsilon of its entropy) or by
maximum likelihood over message pairs.

Randomness discipline: the codebooks and every trial own counter-based
streams keyed by (seed, item, role), so results are bit-identical for any
thread count and any execution order.
"""

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import GuardError
from .model import FsMacSpec, StrategyChannel
from .rates import JointLaw, TeamPolicy, joint_law
from .rng import ROLE_CODEBOOKS, ROLE_TRIAL, stream

MESSAGE_CAP = 1 << 20
PAIR_CAP = 1 << 20
WILSON_Z = 1.959963984540054  # two-sided 95%

DECODERS = ("typicality", "max_likelihood")

OUTCOME_OK = "ok"
OUTCOME_NO_TYPICAL = "no_typical"
OUTCOME_AMBIGUOUS = "ambiguous"
OUTCOME_WRONG = "wrong_single"


def _message_count(blocklength: int, rate: float) -> int:
    # the 1e-9 slack keeps integral exponents from rounding up a whole message
    return math.ceil(2.0 ** (blocklength * rate) - 1e-9)


@dataclass(frozen=True)
class SimConfig:
    blocklength: int
    rate_a: float
    rate_b: float
    epsilon: float = 0.1
    trials: int = 200
    seed: int = 0
    decoder: str = "typicality"

    def __post_init__(self):
        if self.blocklength < 1:
            raise ValueError(f"blocklength must be >= 1, got {self.blocklength}")
        if self.rate_a < 0 or self.rate_b < 0:
            raise ValueError("rates must be nonnegative")
        if not 0 < self.epsilon <= 100:
            raise ValueError(f"epsilon must be in (0, 100], got {self.epsilon}")
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if self.decoder not in DECODERS:
            raise ValueError(f"decoder must be one of {DECODERS}")
        ma, mb = self.messages_a, self.messages_b
        if ma > MESSAGE_CAP or mb > MESSAGE_CAP:
            raise GuardError(f"message guard: {ma} x {mb} messages exceed cap {MESSAGE_CAP}")
        if ma * mb > PAIR_CAP:
            raise GuardError(
                f"decoder pair guard: {ma} x {mb} message pairs exceed cap {PAIR_CAP}"
            )

    @property
    def messages_a(self) -> int:
        return _message_count(self.blocklength, self.rate_a)

    @property
    def messages_b(self) -> int:
        return _message_count(self.blocklength, self.rate_b)


@dataclass(frozen=True)
class Codebooks:
    policy: TeamPolicy
    ids_a: np.ndarray  # (messages_a, blocklength) strategy ids
    ids_b: np.ndarray


@dataclass(frozen=True)
class TrialOutcome:
    outcome: str
    truth: tuple
    decoded: tuple | None
    s_seq: np.ndarray
    y_seq: np.ndarray


@dataclass(frozen=True)
class SimReport:
    config: SimConfig
    trials: int
    errors: int
    error_rate: float
    wilson_low: float
    wilson_high: float
    no_typical_count: int
    decoder_ambiguous_count: int
    wrong_decode_count: int


def wilson_interval(errors: int, trials: int, z: float = WILSON_Z) -> tuple:
    """Wilson score interval for a binomial proportion."""
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    if not 0 <= errors <= trials:
        raise ValueError(f"errors {errors} outside [0, {trials}]")
    phat = errors / trials
    z2n = z * z / trials
    denom = 1.0 + z2n
    center = (phat + z2n / 2.0) / denom
    half = z * math.sqrt(phat * (1.0 - phat) / trials + z2n / (4.0 * trials)) / denom
    low = 0.0 if errors == 0 else max(0.0, center - half)  # exact at the edges
    high = 1.0 if errors == trials else min(1.0, center + half)
    return low, high


def generate_codebooks(policy: TeamPolicy, cfg: SimConfig,
                       rng: np.random.Generator | None = None) -> Codebooks:
    """Draw both codebooks from one stream, sender a first."""
    if rng is None:
        rng = stream(cfg.seed, 0, ROLE_CODEBOOKS)
    ids_a = rng.choice(policy.pi_a.size, size=(cfg.messages_a, cfg.blocklength),
                       p=policy.pi_a)
    ids_b = rng.choice(policy.pi_b.size, size=(cfg.messages_b, cfg.blocklength),
                       p=policy.pi_b)
    ids_a.setflags(write=False)
    ids_b.setflags(write=False)
    return Codebooks(policy=policy, ids_a=ids_a, ids_b=ids_b)


def _log2_floor(p: np.ndarray) -> np.ndarray:
    # at p == 0 this reads about -996, which fails any sane typicality margin
    return np.log2(np.maximum(p, 1e-300))


def _axis_subsets():
    for r in range(1, 5):
        yield from itertools.combinations(range(4), r)


class _DecodeContext:
    """Subset marginals, their entropies, and log tables for one policy law.

    Codebook independent, so one context serves every trial of a run."""

    def __init__(self, spec: FsMacSpec, chan: StrategyChannel, policy: TeamPolicy):
        self.q = chan.q
        self.logq = _log2_floor(chan.q)
        self.state_pmf = spec.state_pmf
        law = joint_law(spec, chan, policy).p
        self.tables = {}
        for combo in _axis_subsets():
            drop = tuple(i for i in range(4) if i not in combo)
            marg = law.sum(axis=drop)
            log_t = _log2_floor(marg)
            self.tables[combo] = (log_t, float(-(marg * log_t).sum()))


def typicality_check(seqs, law, epsilon: float) -> bool:
    """Joint typicality, straight from the definition.

    ``seqs`` maps the axis names 's', 'ta', 'tb', 'y' to equal-length integer
    sequences; ``law`` is the single-letter joint pmf (JointLaw or a 4-axis
    array in that axis order). Every one of the 15 nonempty variable subsets
    must have empirical log-likelihood rate within epsilon of the subset
    entropy, and visiting a zero-probability tuple fails outright.

    This is the reference path: it shares no code with the vectorized
    decoder mask, which is tested against it.
    """
    p = law.p if isinstance(law, JointLaw) else np.asarray(law, dtype=np.float64)
    if p.ndim != 4:
        raise ValueError(f"law must have 4 axes, got {p.ndim}")
    if not epsilon > 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    arrs = tuple(np.asarray(seqs[k], dtype=np.int64) for k in ("s", "ta", "tb", "y"))
    n = arrs[0].size
    if n < 1 or any(a.shape != (n,) for a in arrs):
        raise ValueError("sequences must share one length >= 1")
    for combo in _axis_subsets():
        drop = tuple(i for i in range(4) if i not in combo)
        marg = p.sum(axis=drop)
        log_t = _log2_floor(marg)
        ent = float(-(marg * log_t).sum())
        total = 0.0
        for t in range(n):
            idx = tuple(arrs[axis][t] for axis in combo)
            if marg[idx] == 0.0:
                return False
            total += log_t[idx]
        if abs(-total / n - ent) >= epsilon:
            return False
    return True


def _single_side_scores(ctx, combo, s_seq, y_seq, ids):
    log_t, _ = ctx.tables[combo]
    index = tuple(
        {0: s_seq, 3: y_seq}.get(axis, ids) for axis in combo
    )
    return log_t[index].mean(axis=-1)        # (messages,)


def _pair_scores(log_t, combo, s_seq, y_seq, ids_a, ids_b):
    n = s_seq.size
    acc = np.zeros((ids_a.shape[0], ids_b.shape[0]))
    for t in range(n):
        index = tuple(
            {0: s_seq[t], 1: ids_a[:, t, None], 2: ids_b[None, :, t], 3: y_seq[t]}[axis]
            for axis in combo
        )
        acc += log_t[index]
    return acc / n


def _typical_mask(ctx: _DecodeContext, books: Codebooks, s_seq, y_seq,
                  epsilon: float) -> np.ndarray:
    """Boolean (messages_a, messages_b) mask of jointly typical candidates."""
    ids_a, ids_b = books.ids_a, books.ids_b
    ma, mb = ids_a.shape[0], ids_b.shape[0]
    for combo in [(0,), (3,), (0, 3)]:
        log_t, ent = ctx.tables[combo]
        index = tuple({0: s_seq, 3: y_seq}[axis] for axis in combo)
        if abs(-log_t[index].mean() - ent) >= epsilon:
            return np.zeros((ma, mb), dtype=bool)
    ok_a = np.ones(ma, dtype=bool)
    for combo in [(1,), (0, 1), (1, 3), (0, 1, 3)]:
        score = _single_side_scores(ctx, combo, s_seq, y_seq, ids_a)
        ok_a &= np.abs(-score - ctx.tables[combo][1]) < epsilon
    ok_b = np.ones(mb, dtype=bool)
    for combo in [(2,), (0, 2), (2, 3), (0, 2, 3)]:
        score = _single_side_scores(ctx, combo, s_seq, y_seq, ids_b)
        ok_b &= np.abs(-score - ctx.tables[combo][1]) < epsilon
    mask = ok_a[:, None] & ok_b[None, :]
    if not mask.any():
        return mask
    for combo in [(1, 2), (0, 1, 2), (1, 2, 3), (0, 1, 2, 3)]:
        log_t, ent = ctx.tables[combo]
        score = _pair_scores(log_t, combo, s_seq, y_seq, ids_a, ids_b)
        mask &= np.abs(-score - ent) < epsilon
    return mask


def _classify(candidates, truth) -> tuple:
    if len(candidates) == 0:
        return OUTCOME_NO_TYPICAL, None
    if len(candidates) > 1:
        return OUTCOME_AMBIGUOUS, None
    decoded = tuple(int(v) for v in candidates[0])
    if decoded != truth:
        return OUTCOME_WRONG, decoded
    return OUTCOME_OK, decoded


def _run_trial(ctx: _DecodeContext, books: Codebooks, cfg: SimConfig,
               rng: np.random.Generator) -> TrialOutcome:
    n = cfg.blocklength
    s_seq = rng.choice(ctx.state_pmf.size, size=n, p=ctx.state_pmf)
    wa = int(rng.integers(cfg.messages_a))
    wb = int(rng.integers(cfg.messages_b))
    a_true = books.ids_a[wa]
    b_true = books.ids_b[wb]
    probs = ctx.q[s_seq, a_true, b_true]            # (n, Y)
    edges = probs.cumsum(axis=1)
    edges[:, -1] = 1.0  # rounding must not leave a dead zone above the last bin
    y_seq = (rng.random(n)[:, None] < edges).argmax(axis=1)
    truth = (wa, wb)
    if cfg.decoder == "typicality":
        mask = _typical_mask(ctx, books, s_seq, y_seq, cfg.epsilon)
        outcome, decoded = _classify(np.argwhere(mask), truth)
    else:
        scores = _pair_scores(ctx.logq, (0, 1, 2, 3), s_seq, y_seq,
                              books.ids_a, books.ids_b)
        winners = np.argwhere(scores == scores.max())
        outcome, decoded = _classify(winners, truth)
        if outcome == OUTCOME_NO_TYPICAL:
            raise AssertionError("ML always has at least one argmax")
    return TrialOutcome(outcome=outcome, truth=truth, decoded=decoded,
                        s_seq=s_seq, y_seq=y_seq)


def run_trial(spec: FsMacSpec, chan: StrategyChannel, books: Codebooks,
              cfg: SimConfig, rng: np.random.Generator) -> TrialOutcome:
    """One trial of a fixed codebook pair; estimate_error redraws codebooks."""
    return _run_trial(_DecodeContext(spec, chan, books.policy), books, cfg, rng)


def estimate_error(spec: FsMacSpec, chan: StrategyChannel, policy: TeamPolicy,
                   cfg: SimConfig, threads: int = 1) -> SimReport:
    """Monte Carlo block-error estimate with a Wilson 95% interval.

    Every trial draws a fresh codebook pair, so the estimate targets the
    random-coding ensemble average rather than the error of one lucky or
    unlucky code (use run_trial in a loop to study a fixed code).
    """
    ctx = _DecodeContext(spec, chan, policy)

    def one(trial: int) -> str:
        books = generate_codebooks(policy, cfg,
                                   stream(cfg.seed, trial, ROLE_CODEBOOKS))
        return _run_trial(ctx, books, cfg,
                          stream(cfg.seed, trial, ROLE_TRIAL)).outcome

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(one, range(cfg.trials)))
    else:
        outcomes = [one(t) for t in range(cfg.trials)]
    no_typical = outcomes.count(OUTCOME_NO_TYPICAL)
    ambiguous = outcomes.count(OUTCOME_AMBIGUOUS)
    wrong = outcomes.count(OUTCOME_WRONG)
    errors = no_typical + ambiguous + wrong
    low, high = wilson_interval(errors, cfg.trials)
    return SimReport(config=cfg, trials=cfg.trials, errors=errors,
                     error_rate=errors / cfg.trials, wilson_low=low, wilson_high=high,
                     no_typical_count=no_typical, decoder_ambiguous_count=ambiguous,
                     wrong_decode_count=wrong)
