"""Monte Carlo simulation of the keyed qubit scheme.

Alice sends data bit ``b`` for a symbol with selector ``(j, p)`` as the circle
point ``2*pi*j/M + (b ^ p)*pi``.  The channel depolarises each qubit with
probability ``channel_noise``; Bob measures in basis ``j`` and removes the
polarity.  The attacker works on a copy that has passed through the same
channel.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import rng as rngmod
from .keystream import (
    LfsrSpec,
    bits_per_symbol,
    int_to_seed,
    running_selectors,
    seeds_array,
    expand_keys_batch,
    selector_arrays,
)
from .qubit import QkConstellation, helstrom_angle, qk_eve_states
from .stats import Estimate, proportion

KEY_GUESS_CAP = 20


class TractabilityError(ValueError):
    pass


def _seed_bits(seed) -> tuple[int, ...]:
    if isinstance(seed, str):
        return tuple(int(c) for c in seed)
    return tuple(int(b) for b in seed)


@dataclass(frozen=True)
class QkConfig:
    constellation: QkConstellation
    lfsr: LfsrSpec
    seed: tuple[int, ...]
    n: int
    channel_noise: float = 0.0
    rng_seed: int = 0
    key_mode: str = "running"
    verify_bits: int = 8

    def __post_init__(self):
        object.__setattr__(self, "seed", _seed_bits(self.seed))
        if self.n < 1:
            raise ValueError("data length n must be at least 1")
        if not 0.0 <= self.channel_noise <= 1.0:
            raise ValueError("channel noise must lie in [0, 1]")
        if self.verify_bits < 1:
            raise ValueError("verification key needs at least one bit")
        self.constellation.check_keyable()

    @property
    def M(self) -> int:
        return self.constellation.M

    @property
    def polarity(self) -> bool:
        return self.constellation.polarity

    def selectors(self, seed=None) -> tuple[np.ndarray, np.ndarray]:
        return running_selectors(self.lfsr, self.seed if seed is None else seed,
                                 self.n, self.M, self.polarity, self.key_mode)


@dataclass
class TrialRecord:
    data_bits: np.ndarray
    bob_bits: np.ndarray
    eve_bits: np.ndarray
    verify_verdict: bool
    trial_index: int = 0
    bob_errors: int = field(init=False)
    eve_errors: int = field(init=False)

    def __post_init__(self):
        n = len(self.data_bits)
        if len(self.bob_bits) != n or len(self.eve_bits) != n:
            raise ValueError("trial sequences must share length n")
        self.bob_errors = int(np.count_nonzero(self.bob_bits != self.data_bits))
        self.eve_errors = int(np.count_nonzero(self.eve_bits != self.data_bits))

    def __eq__(self, other):
        if not isinstance(other, TrialRecord):
            return NotImplemented
        return (self.trial_index == other.trial_index
                and self.verify_verdict == other.verify_verdict
                and np.array_equal(self.data_bits, other.data_bits)
                and np.array_equal(self.bob_bits, other.bob_bits)
                and np.array_equal(self.eve_bits, other.eve_bits))

    def csv_row(self) -> dict:
        return {"trialIndex": self.trial_index, "bobErrors": self.bob_errors,
                "eveErrors": self.eve_errors,
                "verdict": "accept" if self.verify_verdict else "reject"}


def signal_angles(M: int, basis, polarity, data) -> np.ndarray:
    return 2 * np.pi * np.asarray(basis) / M + np.pi * (np.asarray(data) ^ np.asarray(polarity))


def measure(rng: np.random.Generator, state_angles, meas_angles, noise: float) -> np.ndarray:
    """Projective measurement along ``meas_angles`` on depolarised circle states.

    Returns 0 for the outcome aligned with the measurement angle.  The
    outcome probability is the Born rule ``tr(rho Pi)`` written on Bloch
    vectors: ``(1 + (1 - noise) cos(state - meas)) / 2``.
    """
    p_aligned = 0.5 * (1.0 + (1.0 - noise) * np.cos(np.asarray(state_angles) - meas_angles))
    return (rng.random(np.shape(p_aligned)) >= p_aligned).astype(np.uint8)


def eve_ml_table(c: QkConstellation, angle: float) -> tuple[int, int]:
    """Maximum-likelihood bit for each outcome of a measurement at ``angle``.

    Returns ``(bit_if_aligned, bit_if_opposite)``; ``-1`` marks a tie.
    """
    st = qk_eve_states(c)
    n = np.array([math.sin(angle), 0.0, math.cos(angle)])
    p0 = 0.5 * (1 + st.rho0.bloch @ n)
    p1 = 0.5 * (1 + st.rho1.bloch @ n)
    tol = 1e-12
    aligned = -1 if abs(p0 - p1) < tol else int(p1 > p0)
    opposite = -1 if abs(p0 - p1) < tol else int(p1 < p0)
    return aligned, opposite


def eve_decode(rng: np.random.Generator, outcomes: np.ndarray, table: tuple[int, int]) -> np.ndarray:
    out = np.empty(outcomes.shape, dtype=np.uint8)
    for o, b in enumerate(table):
        sel = outcomes == o
        out[sel] = rng.integers(0, 2, int(sel.sum())) if b < 0 else b
    return out


def best_eve_angle(config: QkConfig) -> float:
    st = qk_eve_states(config.constellation)
    return helstrom_angle(st.rho0, st.rho1)


def run_qk_trial(config: QkConfig, trial_index: int = 0, eve_angle: float | None = None,
                 verify: bool = True) -> TrialRecord:
    """One protocol run: modulation, channel, Bob, a constant attack, verification."""
    g = rngmod.stream(config.rng_seed, "qk-trial", trial_index)
    basis, pol = config.selectors()
    data = g.integers(0, 2, config.n).astype(np.uint8)
    theta = signal_angles(config.M, basis, pol, data)
    bob_axis = 2 * np.pi * basis / config.M
    bob = measure(g, theta, bob_axis, config.channel_noise) ^ pol.astype(np.uint8)
    # no error-correction stage: decoded bits are used as they come
    angle = best_eve_angle(config) if eve_angle is None else eve_angle
    eve_out = measure(g, theta, angle, config.channel_noise)
    eve = eve_decode(g, eve_out, eve_ml_table(config.constellation, angle))
    verdict = True
    if verify:
        kv = g.integers(0, 2, config.verify_bits).astype(np.uint8)
        verdict = key_verify(data, bob, kv, int(g.integers(0, 2**63)))
    return TrialRecord(data, bob, eve.astype(np.uint8), verdict, trial_index)


def run_qk_trials(config: QkConfig, trials: int, jobs: int = 1, **kw) -> list[TrialRecord]:
    if jobs <= 1:
        return [run_qk_trial(config, i, **kw) for i in range(trials)]
    from concurrent.futures import ThreadPoolExecutor
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(lambda i: run_qk_trial(config, i, **kw), range(trials)))


def bob_ber(config: QkConfig, trials: int = 1, jobs: int = 1) -> Estimate:
    recs = run_qk_trials(config, trials, jobs, verify=False)
    return proportion(sum(r.bob_errors for r in recs), trials * config.n)


def eve_constant_individual_attack(config: QkConfig, angle: float, trials: int = 1,
                                   jobs: int = 1) -> Estimate:
    """Bit error of the same projective measurement applied to every qubit."""
    recs = run_qk_trials(config, trials, jobs, eve_angle=angle, verify=False)
    return proportion(sum(r.eve_errors for r in recs), trials * config.n)


def attack_angle_sweep(config: QkConfig, angles, trials: int = 1) -> list[tuple[float, Estimate]]:
    return [(float(a), eve_constant_individual_attack(config, float(a), trials)) for a in angles]


def _key_space(degree: int) -> int:
    return (1 << degree) - 1


def _guess_success_probability(config: QkConfig, true_b, true_p, guess_seeds: np.ndarray) -> np.ndarray:
    """Exact probability that measuring in guessed bases decodes all n bits.

    Per qubit the decoded bit is right with probability
    ``(1 + (1 - noise) * (-1)**(p ^ p') * cos(2*pi*(j - j')/M)) / 2``,
    independent of the data bit, so the all-correct event has this product
    as its Born probability.
    """
    w = bits_per_symbol(config.M, config.polarity)
    if config.key_mode == "running":
        bits = expand_keys_batch(config.lfsr, guess_seeds, config.n * w)
        gb, gp = selector_arrays(bits, config.M, config.polarity)
    else:
        gb, gp = selector_arrays(guess_seeds, config.M, config.polarity)
        gb = np.repeat(gb, config.n, axis=-1)
        gp = np.repeat(gp, config.n, axis=-1)
    delta = 2 * np.pi * (true_b[None, :] - gb) / config.M
    sign = np.where((true_p[None, :] ^ gp) == 0, 1.0, -1.0)
    p = 0.5 * (1 + (1 - config.channel_noise) * sign * np.cos(delta))
    with np.errstate(divide="ignore"):
        return np.exp(np.log(p).sum(axis=1))


def eve_key_guess_attack(config: QkConfig, trials: int, jobs: int = 1,
                         guess: int | None = None) -> Estimate:
    """Success rate of guessing the seed key and decrypting every qubit.

    Guesses are uniform over the nonzero seeds (the all-zero register is not a
    valid key).  ``guess`` pins the guessed key value for every trial.
    """
    d = len(config.seed)
    if d > KEY_GUESS_CAP:
        raise TractabilityError(f"|K| = {d} exceeds the key-guess cap {KEY_GUESS_CAP}")
    true_b, true_p = config.selectors()
    true_b = true_b.astype(np.int64)
    true_p = true_p.astype(np.int64)

    def block(b: int, count: int) -> int:
        g = rngmod.stream(config.rng_seed, "qk-key-guess", b)
        if guess is None:
            values = g.integers(1, _key_space(d) + 1, count)
        else:
            values = np.full(count, guess)
        uniq, inv = np.unique(values, return_inverse=True)
        seeds = seeds_array(uniq, d)
        probs = np.concatenate([
            _guess_success_probability(config, true_b, true_p, seeds[i:i + 256])
            for i in range(0, len(seeds), 256)])
        return int(np.count_nonzero(g.random(count) < probs[inv]))

    hits = sum(rngmod.map_blocks(block, trials, jobs))
    return proportion(hits, trials)


def seed_value(seed) -> int:
    v = 0
    for b in _seed_bits(seed):
        v = (v << 1) | b
    return v


# -- key verification ------------------------------------------------------

def toeplitz_hash(bits: np.ndarray, diag: np.ndarray) -> np.ndarray:
    """Multiply bit vectors by binary Toeplitz matrices over GF(2).

    ``bits`` has shape ``(..., n)``; ``diag`` has shape ``(..., m + n - 1)``
    and defines ``T[i, j] = diag[i - j + n - 1]``.  Returns ``(..., m)``.
    """
    bits = np.asarray(bits, dtype=np.uint8)
    diag = np.asarray(diag, dtype=np.uint8)
    n = bits.shape[-1]
    m = diag.shape[-1] - n + 1
    if m < 1:
        raise ValueError("Toeplitz diagonal too short")
    out = np.empty(np.broadcast_shapes(bits.shape[:-1], diag.shape[:-1]) + (m,), dtype=np.uint8)
    for i in range(m):
        row = diag[..., i:i + n][..., ::-1]
        out[..., i] = np.bitwise_and(row, bits).sum(axis=-1, dtype=np.int64) & 1
    return out


def _hash_diag(rng_seed: int, m: int, n: int) -> np.ndarray:
    return rngmod.stream(rng_seed, "toeplitz-hash").integers(0, 2, m + n - 1).astype(np.uint8)


def key_verify(kg_a, kg_b, kv, rng_seed: int) -> bool:
    """Open verification of a generated key with a short shared key.

    Both sides hash their key with the public Toeplitz matrix drawn from
    ``rng_seed`` and mask it with ``kv``; accept iff the masked tags agree.
    """
    a = np.asarray(_seed_bits(kg_a) if isinstance(kg_a, str) else kg_a, dtype=np.uint8)
    b = np.asarray(_seed_bits(kg_b) if isinstance(kg_b, str) else kg_b, dtype=np.uint8)
    k = np.asarray(_seed_bits(kv) if isinstance(kv, str) else kv, dtype=np.uint8)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("generated keys must be equal-length bit vectors")
    if k.size < 1:
        raise ValueError("verification key needs at least one bit")
    diag = _hash_diag(rng_seed, k.size, a.size)
    tag_a = toeplitz_hash(a, diag) ^ k
    tag_b = toeplitz_hash(b, diag) ^ k
    return bool(np.array_equal(tag_a, tag_b))


def false_accept_rate(key_bits: int, verify_bits: int, pairs: int, rng_seed: int = 0,
                      jobs: int = 1) -> Estimate:
    """Accept rate over random distinct key pairs, each with a fresh hash."""

    def block(b: int, count: int) -> int:
        g = rngmod.stream(rng_seed, "false-accept", b)
        a = g.integers(0, 2, (count, key_bits), dtype=np.uint8)
        diff = g.integers(0, 2, (count, key_bits), dtype=np.uint8)
        zero = ~diff.any(axis=1)
        while zero.any():
            diff[zero] = g.integers(0, 2, (int(zero.sum()), key_bits), dtype=np.uint8)
            zero = ~diff.any(axis=1)
        kb = a ^ diff
        kv = g.integers(0, 2, (count, verify_bits), dtype=np.uint8)
        diag = g.integers(0, 2, (count, verify_bits + key_bits - 1), dtype=np.uint8)
        ta = toeplitz_hash(a, diag) ^ kv
        tb = toeplitz_hash(kb, diag) ^ kv
        return int(np.count_nonzero((ta == tb).all(axis=1)))

    hits = sum(rngmod.map_blocks(block, pairs, jobs))
    return proportion(hits, pairs)


def default_config(M: int = 4, n: int = 1000, polarity: bool = True, key_bits: int = 8,
                   channel_noise: float = 0.0, rng_seed: int = 0,
                   convention: str = "semicircleBlocks", key: int = 0xA5) -> QkConfig:
    return QkConfig(QkConstellation(M, convention, polarity), LfsrSpec.primitive(key_bits),
                    int_to_seed(key, key_bits), n, channel_noise, rng_seed)
