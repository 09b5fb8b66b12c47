"""Keyed coherent pulse-position modulation over ``m`` modes.

Coherent states stay coherent under linear optics, so a multimode state is
carried as its amplitude vector.  The keyed mode mixer is a butterfly mesh of
``m*log2(m)/2`` Givens rotations; rotation ``r`` takes its mixing angle and
phase from bits ``[16r, 16r+8)`` and ``[16r+8, 16r+16)`` of the running key
expanded from the seed key by the bundled maximal LFSR of degree ``|K|``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import logsumexp, ndtr

from . import rng as rngmod
from .keystream import (
    KeystreamExhaustedError,
    LfsrSpec,
    expand_keys_batch,
    int_to_seed,
    seeds_array,
)
from .qumode import heterodyne
from .stats import Estimate, proportion, sample_mean

ANGLE_BITS = 8
PHASE_BITS = 8
BITS_PER_ROTATION = ANGLE_BITS + PHASE_BITS
BRUTE_FORCE_CAP = 20
LEAK_CAP = 12
_TABLE_LIMIT = 1 << 24


class TractabilityError(ValueError):
    pass


def _log2_modes(m: int) -> int:
    if m < 2 or m & (m - 1):
        raise ValueError(f"m must be a power of two >= 2, got {m}")
    return m.bit_length() - 1


def rotation_count(m: int) -> int:
    return m * _log2_modes(m) // 2


@dataclass(frozen=True, eq=False)
class ModeAmplitudes:
    amps: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.amps, dtype=complex)
        if a.ndim != 1 or a.size < 2:
            raise ValueError("need a vector of at least two mode amplitudes")
        if not np.all(np.isfinite(a)):
            raise ValueError("mode amplitudes must be finite")
        object.__setattr__(self, "amps", a)

    @property
    def m(self) -> int:
        return self.amps.size

    @property
    def total_energy(self) -> float:
        return float(np.sum(np.abs(self.amps) ** 2))


@dataclass(frozen=True)
class CppmConfig:
    m: int
    S: float
    key_bits: int = 8
    eta: float = 1.0
    rng_seed: int = 0
    key: int = 0xB7

    def __post_init__(self):
        _log2_modes(self.m)
        if self.S < 0:
            raise ValueError("S must be nonnegative")
        if not 0.0 < self.eta <= 1.0:
            raise ValueError("transmittance must lie in (0, 1]")
        if self.key_bits < 2:
            raise ValueError("key needs at least two bits")
        if not 1 <= self.key < (1 << self.key_bits):
            raise ValueError("key must be a nonzero value of key_bits bits")

    @property
    def key_space(self) -> int:
        return (1 << self.key_bits) - 1


# -- keyed mesh ------------------------------------------------------------

def stream_angles(bits: np.ndarray, m: int) -> tuple[np.ndarray, np.ndarray]:
    """Mixing angles and phases from running-key bits of shape ``(..., L)``."""
    bits = np.asarray(bits, dtype=np.int64)
    nrot = rotation_count(m)
    need = nrot * BITS_PER_ROTATION
    if bits.shape[-1] < need:
        raise KeystreamExhaustedError(f"mesh for m={m} needs {need} key bits, got {bits.shape[-1]}")
    chunks = bits[..., :need].reshape(bits.shape[:-1] + (nrot, BITS_PER_ROTATION))
    wa = 1 << np.arange(ANGLE_BITS - 1, -1, -1)
    wp = 1 << np.arange(PHASE_BITS - 1, -1, -1)
    theta = 2 * np.pi * (chunks[..., :ANGLE_BITS] * wa).sum(-1) / (1 << ANGLE_BITS)
    phi = 2 * np.pi * (chunks[..., ANGLE_BITS:] * wp).sum(-1) / (1 << PHASE_BITS)
    return theta, phi


def key_angles(values, m: int, key_bits: int) -> tuple[np.ndarray, np.ndarray]:
    """Mesh parameters for integer key values, shape ``(len(values), nrot)``."""
    values = np.asarray(values, dtype=np.int64)
    nrot = rotation_count(m)
    if ((1 << key_bits) - 1) * nrot <= _TABLE_LIMIT:
        th, ph = _angle_table(m, key_bits)
        return th[values - 1], ph[values - 1]
    uniq, inv = np.unique(values, return_inverse=True)
    bits = expand_keys_batch(LfsrSpec.primitive(key_bits), seeds_array(uniq, key_bits),
                             nrot * BITS_PER_ROTATION)
    th, ph = stream_angles(bits, m)
    return th[inv], ph[inv]


@lru_cache(maxsize=16)
def _angle_table(m: int, key_bits: int) -> tuple[np.ndarray, np.ndarray]:
    values = np.arange(1, 1 << key_bits)
    nbits = rotation_count(m) * BITS_PER_ROTATION
    bits = expand_keys_batch(LfsrSpec.primitive(key_bits), seeds_array(values, key_bits), nbits)
    th, ph = stream_angles(bits, m)
    th.setflags(write=False)
    ph.setflags(write=False)
    return th, ph


def _stage_pairs(m: int, s: int) -> tuple[np.ndarray, np.ndarray]:
    idx = np.arange(m)
    lo = idx[(idx >> s) & 1 == 0]
    return lo, lo | (1 << s)


def apply_mesh(vectors, theta, phi, inverse: bool = False) -> np.ndarray:
    """Apply the butterfly mesh (or its inverse) to vectors of shape ``(..., m)``.

    ``theta``/``phi`` have shape ``(..., nrot)`` broadcastable against the
    leading axes of ``vectors``.  Stage ``s`` couples modes ``i`` and
    ``i | 2**s``.
    """
    theta = np.asarray(theta)
    phi = np.asarray(phi)
    v = np.asarray(vectors, dtype=complex)
    lead = np.broadcast_shapes(v.shape[:-1], theta.shape[:-1])
    v = np.array(np.broadcast_to(v, lead + v.shape[-1:]), dtype=complex, copy=True)
    m = v.shape[-1]
    n_stage = _log2_modes(m)
    half = m // 2
    stages = range(n_stage - 1, -1, -1) if inverse else range(n_stage)
    for s in stages:
        lo, hi = _stage_pairs(m, s)
        th = theta[..., s * half:(s + 1) * half]
        ph = phi[..., s * half:(s + 1) * half]
        c, sn, e = np.cos(th), np.sin(th), np.exp(1j * ph)
        a, b = v[..., lo], v[..., hi]
        if inverse:
            v[..., lo] = c * a + np.conj(e) * sn * b
            v[..., hi] = -e * sn * a + c * b
        else:
            v[..., lo] = c * a - np.conj(e) * sn * b
            v[..., hi] = e * sn * a + c * b
    return v


def apply_keyed(vectors, keys, m: int, key_bits: int, inverse: bool = False) -> np.ndarray:
    """Apply the mesh of ``keys[r]`` to row ``r`` of ``vectors``.

    Rows sharing a key are processed together with one set of angles.
    """
    vectors = np.asarray(vectors, dtype=complex)
    keys = np.asarray(keys, dtype=np.int64)
    uniq, inv = np.unique(keys, return_inverse=True)
    if uniq.size * 4 > keys.size:
        theta, phi = key_angles(keys, m, key_bits)
        return apply_mesh(vectors, theta, phi, inverse)
    theta, phi = key_angles(uniq, m, key_bits)
    out = np.empty(keys.shape + (m,), dtype=complex)
    for j in range(uniq.size):
        rows = np.flatnonzero(inv == j)
        out[rows] = apply_mesh(vectors[rows], theta[j], phi[j], inverse)
    return out


def unitary_from_stream(bits, m: int) -> np.ndarray:
    theta, phi = stream_angles(np.asarray(bits), m)
    return apply_mesh(np.eye(m, dtype=complex), theta, phi).T


def key_unitary(k, m: int) -> np.ndarray:
    """Keyed ``m x m`` mode-mixing unitary; ``k`` is a seed bit string or
    ``(value, key_bits)``."""
    if isinstance(k, tuple) and len(k) == 2 and all(isinstance(x, int) for x in k) and k[1] > 1:
        value, key_bits = k
    else:
        bits = [int(c) for c in k] if isinstance(k, str) else [int(b) for b in k]
        key_bits = len(bits)
        value = int("".join(map(str, bits)), 2)
    if not value:
        raise ValueError("all-zero key")
    theta, phi = key_angles([value], m, key_bits)
    return apply_mesh(np.eye(m, dtype=complex), theta[0], phi[0]).T


def cppm_modulate(i: int, k, config: CppmConfig) -> ModeAmplitudes:
    """Keyed PPM state: the mesh applied to ``sqrt(S) e_i``."""
    if not 0 <= i < config.m:
        raise IndexError(f"message index {i} outside [0, {config.m})")
    value = config.key if k is None else int(k)
    theta, phi = key_angles([value], config.m, config.key_bits)
    e = np.zeros(config.m, dtype=complex)
    e[i] = math.sqrt(config.S)
    return ModeAmplitudes(apply_mesh(e, theta[0], phi[0]))


def _argmax_random_ties(x: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Row-wise argmax of integer counts, ties broken uniformly."""
    return np.argmax(x + 0.5 * rng.random(x.shape), axis=-1)


def bob_direct_decode(received, k, config: CppmConfig, rng: np.random.Generator) -> int:
    """Unmix with the key, photon-count each mode, pick the largest count."""
    amps = received.amps if isinstance(received, ModeAmplitudes) else np.asarray(received)
    value = config.key if k is None else int(k)
    theta, phi = key_angles([value], config.m, config.key_bits)
    back = apply_mesh(amps, theta[0], phi[0], inverse=True)
    counts = rng.poisson(config.eta * np.abs(back) ** 2)
    return int(_argmax_random_ties(counts[None, :], rng)[0])


def direct_detection_error(m: int, S: float, eta: float = 1.0) -> float:
    if m < 2 or S < 0:
        raise ValueError("need m >= 2 and S >= 0")
    return (1 - 1 / m) * math.exp(-eta * S)


def optimal_error_asymptote(S: float) -> float:
    return math.exp(-S)


# -- Monte Carlo block errors ----------------------------------------------

def _true_vectors(config: CppmConfig, msgs: np.ndarray, keys=None) -> np.ndarray:
    e = np.zeros((len(msgs), config.m), dtype=complex)
    e[np.arange(len(msgs)), msgs] = math.sqrt(config.S)
    if keys is None:
        keys = np.full(len(msgs), config.key)
    return apply_keyed(e, keys, config.m, config.key_bits)


def bob_block_error(config: CppmConfig, trials: int, jobs: int = 1) -> Estimate:
    """Monte Carlo block error of the keyed direct-detection receiver."""
    theta, phi = key_angles([config.key], config.m, config.key_bits)
    # Bob's unmixing of every possible transmitted column; row i = message i
    cols = apply_mesh(math.sqrt(config.S) * np.eye(config.m, dtype=complex), theta, phi)
    back = apply_mesh(cols, theta, phi, inverse=True)
    means = config.eta * np.abs(back) ** 2

    def block(b: int, count: int) -> int:
        g = rngmod.stream(config.rng_seed, "cppm-bob", b)
        msgs = g.integers(0, config.m, count)
        counts = g.poisson(means[msgs])
        guess = _argmax_random_ties(counts, g)
        return int(np.count_nonzero(guess != msgs))

    return proportion(sum(rngmod.map_blocks(block, trials, jobs)), trials)


def _wrong_keys(g: np.random.Generator, true_keys: np.ndarray, space: int) -> np.ndarray:
    """Uniform over the key space minus each row's true key."""
    r = g.integers(1, space, len(true_keys))
    return r + (r >= true_keys)


@dataclass
class EveHeterodyneStats:
    block_error: Estimate
    guesses: np.ndarray
    messages: np.ndarray

    def wrong_offsets(self) -> np.ndarray:
        """``(guess - message) mod m`` for the erroneous trials."""
        bad = self.guesses != self.messages
        m = int(max(self.guesses.max(initial=0), self.messages.max(initial=0))) + 1
        return (self.guesses[bad] - self.messages[bad]) % m


def eve_heterodyne_decode(transmitted, true_key, trial_keys, config: CppmConfig,
                          rng: np.random.Generator) -> dict[int, int]:
    """Heterodyne every mode once, then unmix under each trial key.

    Returns the guessed message per trial key (``argmax |component|``).
    ``true_key`` is accepted for symmetry with the oracle-side statistics and
    is not used by the decoder.
    """
    del true_key
    amps = transmitted.amps if isinstance(transmitted, ModeAmplitudes) else np.asarray(transmitted)
    y = heterodyne(amps, rng)
    keys = np.asarray(list(trial_keys), dtype=np.int64)
    if keys.size > (1 << BRUTE_FORCE_CAP):
        raise TractabilityError("too many trial keys")
    theta, phi = key_angles(keys, config.m, config.key_bits)
    z = apply_mesh(np.broadcast_to(y, (keys.size, y.size)), theta, phi, inverse=True)
    guess = np.argmax(np.abs(z), axis=-1)
    return {int(k): int(g) for k, g in zip(keys, guess)}


def eve_block_error(config: CppmConfig, trials: int, mode: str = "true", jobs: int = 1,
                    random_true_key: bool = False) -> EveHeterodyneStats:
    """Heterodyne attack block error.

    ``mode="true"``: Eve unmixes with the true key (true key included).
    ``mode="excluded"``: she uses a uniformly drawn wrong key each trial.
    ``random_true_key`` redraws the transmitted key per trial.
    """
    if mode not in ("true", "excluded"):
        raise ValueError(f"unknown mode {mode!r}")
    if config.key_bits > BRUTE_FORCE_CAP:
        raise TractabilityError(f"|K| = {config.key_bits} exceeds {BRUTE_FORCE_CAP}")

    def block(b: int, count: int):
        g = rngmod.stream(config.rng_seed, f"cppm-eve-{mode}", b)
        msgs = g.integers(0, config.m, count)
        if random_true_key:
            tk = g.integers(1, config.key_space + 1, count)
        else:
            tk = np.full(count, config.key)
        x = _true_vectors(config, msgs, tk)
        y = heterodyne(x, g)
        ek = tk if mode == "true" else _wrong_keys(g, tk, config.key_space)
        z = apply_keyed(y, ek, config.m, config.key_bits, inverse=True)
        return msgs, np.argmax(np.abs(z), axis=-1)

    parts = rngmod.map_blocks(block, trials, jobs, block_size=8192)
    msgs = np.concatenate([p[0] for p in parts])
    guesses = np.concatenate([p[1] for p in parts])
    est = proportion(int(np.count_nonzero(guesses != msgs)), trials)
    return EveHeterodyneStats(est, guesses, msgs)


def heterodyne_error_lower_bound(m: int, S: float, y: float, convention: str = "mMinusOne") -> float:
    """Block-error lower bound ``(1 - Phi(y)**e) * Phi(y - sqrt(2S))``.

    ``convention="log2m"`` uses ``e = log2 m``; ``"mMinusOne"``
    uses ``e = m - 1``, the orthogonal-signal form.
    """
    if m < 2:
        raise ValueError("m must be at least 2")
    if convention == "log2m":
        e = _log2_modes(m)
    elif convention == "mMinusOne":
        e = m - 1
    else:
        raise ValueError(f"unknown exponent convention {convention!r}")
    return float((1 - ndtr(y) ** e) * ndtr(y - math.sqrt(2 * S)))


def max_heterodyne_bound(m: int, S: float, convention: str = "mMinusOne",
                         grid=None) -> tuple[float, float]:
    """Largest bound over a threshold grid; returns ``(bound, y)``."""
    grid = np.linspace(-4.0, 8.0, 1201) if grid is None else np.asarray(grid)
    vals = [heterodyne_error_lower_bound(m, S, float(t), convention) for t in grid]
    i = int(np.argmax(vals))
    return vals[i], float(grid[i])


def profile_chi_square(offsets: np.ndarray, m: int) -> tuple[float, int]:
    """Chi-square per degree of freedom of wrong guesses over the ``m-1`` alternatives."""
    counts = np.bincount(offsets, minlength=m)[1:]
    n = counts.sum()
    if n == 0:
        raise ValueError("no error events")
    expected = n / (m - 1)
    chi2 = float(np.sum((counts - expected) ** 2 / expected))
    dof = m - 2
    return chi2 / dof, int(n)


def error_profile_uniformity(config: CppmConfig, error_events: int,
                             max_trials: int | None = None) -> tuple[float, int]:
    """Wrong-guess uniformity when neither the key nor Eve's trial key is fixed.

    Each trial draws a fresh true key and an independent uniform trial key;
    trials run until ``error_events`` errors have been collected.
    """
    offsets = []
    got = 0
    chunk = 0
    limit = max_trials or 100 * error_events
    done = 0
    while got < error_events and done < limit:
        n = min(1 << 16, limit - done)
        g = rngmod.stream(config.rng_seed, "cppm-profile", chunk)
        msgs = g.integers(0, config.m, n)
        tk = g.integers(1, config.key_space + 1, n)
        ek = g.integers(1, config.key_space + 1, n)
        y = heterodyne(_true_vectors(config, msgs, tk), g)
        z = apply_keyed(y, ek, config.m, config.key_bits, inverse=True)
        guess = np.argmax(np.abs(z), axis=-1)
        bad = guess != msgs
        offsets.append((guess[bad] - msgs[bad]) % config.m)
        got += int(bad.sum())
        done += n
        chunk += 1
    off = np.concatenate(offsets)[:error_events]
    return profile_chi_square(off, config.m)


def key_leak_given_plaintext(config: CppmConfig, trials: int, keys=None, jobs: int = 1) -> Estimate:
    """Monte Carlo ``I(K; Y_E | X)`` in bits under the heterodyne attack.

    Each trial draws a key from ``keys`` (default: every nonzero seed) and a
    message, heterodynes all modes, and scores ``log2`` of the exact key
    posterior against the uniform prior.
    """
    if keys is None:
        if config.key_bits > LEAK_CAP:
            raise TractabilityError(f"|K| = {config.key_bits} exceeds the posterior cap {LEAK_CAP}")
        keys = np.arange(1, config.key_space + 1)
    keys = np.asarray(keys, dtype=np.int64)
    if keys.size > (1 << LEAK_CAP):
        raise TractabilityError("key set too large for brute-force posteriors")
    K = keys.size
    if K == 1:
        return Estimate(0.0, 0.0, trials)
    theta, phi = key_angles(keys, config.m, config.key_bits)
    eye = math.sqrt(config.S) * np.eye(config.m, dtype=complex)
    # means[k, i, :] = transmitted amplitudes of message i under key k
    means = apply_mesh(eye[None, :, :], theta[:, None, :], phi[:, None, :])

    def block(b: int, count: int) -> np.ndarray:
        g = rngmod.stream(config.rng_seed, "cppm-leak", b)
        ki = g.integers(0, K, count)
        msgs = g.integers(0, config.m, count)
        y = heterodyne(means[ki, msgs], g)
        out = np.empty(count)
        step = max(1, (1 << 22) // (K * config.m))
        for s in range(0, count, step):
            sl = slice(s, s + step)
            cand = means[:, msgs[sl], :]                      # (K, B, m)
            ll = -np.sum(np.abs(y[sl][None] - cand) ** 2, axis=-1)  # (K, B)
            post = ll[ki[sl], np.arange(ll.shape[1])] - logsumexp(ll, axis=0)
            out[sl] = (post / math.log(2)) + math.log2(K)
        return out

    vals = np.concatenate(rngmod.map_blocks(block, trials, jobs, block_size=4096))
    return sample_mean(vals)


def default_key_seed(config: CppmConfig) -> tuple[int, ...]:
    return int_to_seed(config.key, config.key_bits)
