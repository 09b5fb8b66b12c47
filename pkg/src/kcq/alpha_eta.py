"""Keyed M-ary phase scheme on a single coherent-state mode.

Symbol phase: ``2*pi*basis/M + (bit ^ polarity)*pi`` followed by the
deliberate signal randomisation (DSR) offset.  Bob knows basis and polarity
but not the DSR offset; the attacker heterodynes a lossless copy.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import rng as rngmod
from .keystream import (
    LfsrSpec,
    SymbolSelector,
    basis_bits,
    int_to_seed,
    running_selectors,
)
from .qumode import (
    CoherentAmplitude,
    TruncationError,
    coherent_fock,
    cutoff_rule,
    heterodyne,
    homodyne,
)
from .stats import Estimate, proportion

DSR_POLICIES = ("none", "semicircle", "fullCircle", "discretized")
HIDING_GRID = 720


@dataclass(frozen=True)
class AlphaEtaConfig:
    M: int
    S: float
    dsr: str = "none"
    dsr_count: int = HIDING_GRID
    lfsr: LfsrSpec = LfsrSpec.primitive(16)
    seed: tuple[int, ...] = int_to_seed(0xACE1, 16)
    rng_seed: int = 0
    polarity: bool = True
    eta: float = 1.0
    n: int = 1000

    def __post_init__(self):
        basis_bits(self.M)
        if self.S < 0:
            raise ValueError("S must be nonnegative")
        if self.dsr not in DSR_POLICIES:
            raise ValueError(f"unknown DSR policy {self.dsr!r}")
        if self.dsr == "discretized" and self.dsr_count < 16:
            raise ValueError("discretized DSR needs at least 16 points")
        if not 0.0 < self.eta <= 1.0:
            raise ValueError("transmittance must lie in (0, 1]")
        object.__setattr__(self, "seed", tuple(int(b) for b in self.seed))

    def selectors(self, seed=None, n: int | None = None):
        return running_selectors(self.lfsr, self.seed if seed is None else seed,
                                 self.n if n is None else n, self.M, self.polarity)


def dsr_offsets(config: AlphaEtaConfig, rng: np.random.Generator, size) -> np.ndarray:
    if config.dsr == "none":
        return np.zeros(size)
    if config.dsr == "semicircle":
        return rng.uniform(-np.pi / 2, np.pi / 2, size)
    if config.dsr == "fullCircle":
        return rng.uniform(0.0, 2 * np.pi, size)
    j = rng.integers(0, config.dsr_count, size)
    return -np.pi / 2 + (j + 0.5) * np.pi / config.dsr_count


def dsr_grid(config: AlphaEtaConfig, cutoff: int) -> np.ndarray:
    """Equal-weight offset points representing the DSR density exactly
    on a Fock space of the given cutoff."""
    if config.dsr == "none":
        return np.zeros(1)
    if config.dsr == "fullCircle":
        count = max(HIDING_GRID, 4 * cutoff)
        return 2 * np.pi * np.arange(count) / count
    count = config.dsr_count if config.dsr == "discretized" else HIDING_GRID
    return -np.pi / 2 + (np.arange(count) + 0.5) * np.pi / count


def keyed_phase(M: int, basis, polarity, bit):
    return 2 * np.pi * np.asarray(basis) / M + np.pi * (np.asarray(bit) ^ np.asarray(polarity))


def alpha_eta_modulate(bit: int, selector: SymbolSelector, config: AlphaEtaConfig,
                       rng: np.random.Generator | None = None) -> CoherentAmplitude:
    if not 0 <= selector.basis < config.M // 2:
        raise ValueError(f"basis {selector.basis} outside [0, {config.M // 2})")
    theta = float(keyed_phase(config.M, selector.basis, selector.polarity, bit))
    if config.dsr != "none":
        theta += float(dsr_offsets(config, rngmod.as_generator(rng), ()))
    return CoherentAmplitude.polar(config.S, theta)


def modulate_stream(data, basis, polarity, config: AlphaEtaConfig,
                    rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Vector form of :func:`alpha_eta_modulate`; returns amplitudes and DSR offsets."""
    theta = keyed_phase(config.M, basis, polarity, data)
    off = dsr_offsets(config, rng, np.shape(theta))
    return math.sqrt(config.S) * np.exp(1j * (theta + off)), off


def bob_decide(amps, basis, polarity, receiver: str, config: AlphaEtaConfig,
               rng: np.random.Generator) -> np.ndarray:
    """Keyed binary decision on received amplitudes (array form of bob_receive)."""
    amps = math.sqrt(config.eta) * np.asarray(amps, dtype=complex)
    axis = 2 * np.pi * np.asarray(basis) / config.M
    if receiver == "homodyne":
        x = homodyne(amps, axis, rng)
        raw = (x < 0).astype(np.uint8)
    elif receiver == "kennedyModel":
        proj = (amps * np.exp(-1j * axis)).real
        raw = (proj < 0).astype(np.uint8)
        tie = proj == 0
        raw[tie] = rng.integers(0, 2, int(tie.sum()))
        flip = rng.random(proj.shape) < 0.5 * np.exp(-4 * proj * proj)
        raw ^= flip.astype(np.uint8)
    else:
        raise ValueError(f"unknown receiver {receiver!r}")
    return raw ^ np.asarray(polarity, dtype=np.uint8)


def bob_receive(amplitude, selector: SymbolSelector, receiver: str, config: AlphaEtaConfig,
                rng: np.random.Generator) -> int:
    a = amplitude.alpha if isinstance(amplitude, CoherentAmplitude) else complex(amplitude)
    out = bob_decide(np.array([a]), np.array([selector.basis]),
                     np.array([selector.polarity]), receiver, config, rng)
    return int(out[0])


@dataclass
class PhaseAttackResult:
    phase_estimates: np.ndarray
    ber_by_key: dict[int, Estimate]

    def best(self) -> tuple[int, Estimate]:
        k = min(self.ber_by_key, key=lambda key: self.ber_by_key[key].value)
        return k, self.ber_by_key[k]


def eve_decode(y: np.ndarray, basis, polarity, M: int) -> np.ndarray:
    """Nearest antipodal point of the trial basis to the heterodyne outcome."""
    axis = 2 * np.pi * np.asarray(basis) / M
    return ((y * np.exp(-1j * axis)).real < 0).astype(np.uint8) ^ np.asarray(polarity, dtype=np.uint8)


def eve_phase_attack(amplitudes, data, config: AlphaEtaConfig, trial_keys,
                     rng: np.random.Generator) -> PhaseAttackResult:
    """Heterodyne every symbol once, then decode under each candidate key.

    ``trial_keys`` are seed values of ``config.lfsr``; ``data`` is the true bit
    sequence used to score each key.
    """
    y = heterodyne(amplitudes, rng)
    data = np.asarray(data, dtype=np.uint8)
    d = config.lfsr.degree
    out = {}
    for k in trial_keys:
        b, p = config.selectors(int_to_seed(int(k), d), n=len(data))
        guess = eve_decode(y, b, p, config.M)
        out[int(k)] = proportion(int(np.count_nonzero(guess != data)), len(data))
    return PhaseAttackResult(np.angle(y), out)


@dataclass
class AlphaEtaRun:
    bob: Estimate
    eve: PhaseAttackResult


def run_alpha_eta(config: AlphaEtaConfig, trial_keys=(), receiver: str = "homodyne",
                  trial_index: int = 0) -> AlphaEtaRun:
    """One block of ``config.n`` symbols: Bob's keyed BER and Eve's per-key BERs."""
    g = rngmod.stream(config.rng_seed, "alpha-eta", trial_index)
    basis, pol = config.selectors()
    data = g.integers(0, 2, config.n).astype(np.uint8)
    amps, _ = modulate_stream(data, basis, pol, config, g)
    bob = bob_decide(amps, basis, pol, receiver, config, g)
    bob_est = proportion(int(np.count_nonzero(bob != data)), config.n)
    eve = eve_phase_attack(amps, data, config, trial_keys, g)
    return AlphaEtaRun(bob_est, eve)


def bob_ber_mc(config: AlphaEtaConfig, trials: int, receiver: str = "homodyne",
               jobs: int = 1, fixed_offset: float | None = None) -> Estimate:
    """Bob's BER over ``trials`` symbols with the key stream cycled per block.

    ``fixed_offset`` replaces the DSR draw with a constant rotation.
    """
    n_sel = min((1 << config.lfsr.degree) - 1, rngmod.BLOCK_SIZE)
    basis_all, pol_all = config.selectors(n=n_sel)

    def block(b: int, count: int) -> int:
        g = rngmod.stream(config.rng_seed, "alpha-eta-bob", b)
        idx = np.arange(count) % n_sel
        basis, pol = basis_all[idx], pol_all[idx]
        data = g.integers(0, 2, count).astype(np.uint8)
        if fixed_offset is None:
            amps, _ = modulate_stream(data, basis, pol, config, g)
        else:
            theta = keyed_phase(config.M, basis, pol, data) + fixed_offset
            amps = math.sqrt(config.S) * np.exp(1j * theta)
        dec = bob_decide(amps, basis, pol, receiver, config, g)
        return int(np.count_nonzero(dec != data))

    return proportion(sum(rngmod.map_blocks(block, trials, jobs)), trials)


def semicircle_homodyne_ber(S: float, eta: float = 1.0, points: int = 4001) -> float:
    """Homodyne BER averaged over a uniform semicircle DSR offset."""
    from scipy.integrate import quad
    from .qumode import qfunc
    val, _ = quad(lambda t: float(qfunc(2 * math.sqrt(eta * S) * math.cos(t))),
                  -np.pi / 2, np.pi / 2, limit=200)
    return val / np.pi


# -- key hiding ------------------------------------------------------------

def _as_selector(k) -> SymbolSelector:
    if isinstance(k, SymbolSelector):
        return k
    return SymbolSelector(int(k), 0)


def averaged_state(config: AlphaEtaConfig, key, cutoff: int, global_phase: float = 0.0) -> np.ndarray:
    """Per-symbol state averaged over uniform data and the DSR density."""
    sel = _as_selector(key)
    offsets = dsr_grid(config, cutoff)
    phases = np.concatenate([
        keyed_phase(config.M, sel.basis, sel.polarity, b) + offsets for b in (0, 1)
    ]) + global_phase
    base = coherent_fock(math.sqrt(config.S), cutoff).coefficients
    n = np.arange(cutoff)
    C = base[None, :] * np.exp(1j * np.outer(phases, n))
    return C.T @ C.conj() / len(phases)


def key_hiding_distance(config: AlphaEtaConfig, k_a, k_b, cutoff: int | None = None,
                        global_phase: float = 0.0) -> float:
    """Trace norm ``||rho_A - rho_B||_1`` of the key-conditioned symbol states.

    Keys are per-symbol selectors (an int is read as a basis index with
    polarity 0).
    """
    cutoff = cutoff or cutoff_rule(config.S)
    if cutoff < cutoff_rule(config.S):
        raise TruncationError(f"cutoff {cutoff} below the required {cutoff_rule(config.S)}")
    ra = averaged_state(config, k_a, cutoff, global_phase)
    rb = averaged_state(config, k_b, cutoff, global_phase)
    ev = np.linalg.eigvalsh(ra - rb)
    return float(np.sum(np.abs(ev)))
