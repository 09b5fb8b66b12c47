"""Running-key generation from a seed key, symbol chunking, and the
Berlekamp-Massey recovery attack.

Register convention (Fibonacci, external XOR): stages ``s_1 .. s_d`` hold the
next ``d`` output bits, stage 1 is emitted before each shift, and the new
stage-``d`` bit is ``XOR of s_{d+1-t}`` over taps ``t``.  In sequence terms
``a[n] = XOR_t a[n - t]``, i.e. the connection polynomial is
``1 + sum_t x**t``, which is exactly what :func:`berlekamp_massey` returns.
The seed is the initial register content, so it is also the first ``d``
output bits.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np


class KeystreamError(ValueError):
    """Base class for keystream failures."""


class DegenerateSeedError(KeystreamError):
    pass


class UnsupportedConstellationError(KeystreamError):
    pass


class LengthMismatchError(KeystreamError):
    pass


class KeystreamExhaustedError(KeystreamError):
    pass


# Primitive feedback tap sets; every entry is checked for full period in the
# test suite (degrees 2..20 exhaustively).
PRIMITIVE_TAPS: dict[int, tuple[int, ...]] = {
    2: (2, 1),
    3: (3, 1),
    4: (4, 1),
    5: (5, 3),
    6: (6, 5),
    7: (7, 6),
    8: (8, 6, 5, 4),
    9: (9, 5),
    10: (10, 7),
    11: (11, 9),
    12: (12, 6, 4, 1),
    13: (13, 4, 3, 1),
    14: (14, 5, 3, 1),
    15: (15, 14),
    16: (16, 15, 13, 4),
    17: (17, 14),
    18: (18, 11),
    19: (19, 6, 2, 1),
    20: (20, 17),
}


def _bits(seq) -> tuple[int, ...]:
    if isinstance(seq, str):
        seq = seq.replace(" ", "")
        if set(seq) - {"0", "1"}:
            raise KeystreamError(f"not a bit string: {seq!r}")
        return tuple(int(c) for c in seq)
    out = tuple(int(b) for b in seq)
    if any(b not in (0, 1) for b in out):
        raise KeystreamError("bits must be 0 or 1")
    return out


@dataclass(frozen=True)
class LfsrSpec:
    degree: int
    taps: frozenset[int]

    def __init__(self, degree: int, taps: Iterable[int]):
        taps = frozenset(int(t) for t in taps)
        if degree < 2:
            raise KeystreamError("LFSR degree must be at least 2")
        if not taps:
            raise KeystreamError("tap set must be nonempty")
        if degree not in taps:
            raise KeystreamError("the degree tap must be present")
        if min(taps) < 1 or max(taps) > degree:
            raise KeystreamError(f"taps must lie in [1, {degree}]")
        object.__setattr__(self, "degree", int(degree))
        object.__setattr__(self, "taps", taps)

    @classmethod
    def primitive(cls, degree: int) -> "LfsrSpec":
        """Maximum-length register of the given degree from the bundled table."""
        try:
            return cls(degree, PRIMITIVE_TAPS[degree])
        except KeyError:
            raise KeystreamError(f"no bundled primitive polynomial for degree {degree}") from None

    @property
    def feedback_mask(self) -> int:
        return sum(1 << (self.degree - t) for t in self.taps)

    def to_config(self) -> dict:
        return {"degree": self.degree, "taps": sorted(self.taps, reverse=True)}

    @classmethod
    def from_config(cls, cfg: dict) -> "LfsrSpec":
        return cls(cfg["degree"], cfg["taps"])


def _state_from_bits(bits: Sequence[int]) -> int:
    return sum(b << i for i, b in enumerate(bits))


def _check_seed(spec: LfsrSpec, seed) -> tuple[int, ...]:
    seed = _bits(seed)
    if len(seed) != spec.degree:
        raise KeystreamError(f"seed has {len(seed)} bits, register has {spec.degree} stages")
    if not any(seed):
        raise DegenerateSeedError("all-zero seed is a fixed point of the register")
    return seed


def _run(mask: int, degree: int, state: int, length: int) -> list[int]:
    out = []
    top = degree - 1
    for _ in range(length):
        out.append(state & 1)
        fb = (state & mask).bit_count() & 1
        state = (state >> 1) | (fb << top)
    return out


@dataclass(frozen=True)
class RunningKey:
    bits: tuple[int, ...]
    spec: LfsrSpec
    seed: tuple[int, ...]

    def __len__(self):
        return len(self.bits)

    def as_array(self) -> np.ndarray:
        return np.array(self.bits, dtype=np.uint8)

    def to_hex(self) -> str:
        return bits_to_hex(self.bits)


def expand_key(spec: LfsrSpec, seed, length: int) -> RunningKey:
    """First ``length`` output bits of the register started at ``seed``."""
    seed = _check_seed(spec, seed)
    if length < 0:
        raise KeystreamError("length must be nonnegative")
    bits = _run(spec.feedback_mask, spec.degree, _state_from_bits(seed), length)
    return RunningKey(tuple(bits), spec, seed)


def register_states(spec: LfsrSpec, seed, steps: int) -> list[tuple[int, ...]]:
    """Register contents ``(s_1, ..., s_d)`` before each of ``steps`` shifts."""
    seed = _check_seed(spec, seed)
    mask, d = spec.feedback_mask, spec.degree
    state = _state_from_bits(seed)
    states = []
    for _ in range(steps):
        states.append(tuple((state >> i) & 1 for i in range(d)))
        fb = (state & mask).bit_count() & 1
        state = (state >> 1) | (fb << (d - 1))
    return states


def period(spec: LfsrSpec, seed=None) -> int:
    """Cycle length of the register state sequence from ``seed``.

    Only valid for nonsingular registers (degree tap present), where every
    state lies on a cycle.
    """
    seed = _check_seed(spec, seed if seed is not None else "0" * (spec.degree - 1) + "1")
    mask, top = spec.feedback_mask, spec.degree - 1
    start = state = _state_from_bits(seed)
    n = 0
    while True:
        fb = (state & mask).bit_count() & 1
        state = (state >> 1) | (fb << top)
        n += 1
        if state == start:
            return n


def is_maximal(spec: LfsrSpec) -> bool:
    return period(spec) == (1 << spec.degree) - 1


def expand_keys_batch(spec: LfsrSpec, seeds: np.ndarray, length: int) -> np.ndarray:
    """Vectorised :func:`expand_key` over a ``(count, degree)`` array of seeds."""
    seeds = np.asarray(seeds, dtype=np.uint8)
    if seeds.ndim != 2 or seeds.shape[1] != spec.degree:
        raise KeystreamError("seeds must have shape (count, degree)")
    if not seeds.any(axis=1).all():
        raise DegenerateSeedError("all-zero seed in batch")
    d = spec.degree
    buf = np.zeros((seeds.shape[0], max(length, d) + d), dtype=np.uint8)
    buf[:, :d] = seeds
    taps = sorted(spec.taps)
    for n in range(d, length + d):
        acc = buf[:, n - taps[0]].copy()
        for t in taps[1:]:
            acc ^= buf[:, n - t]
        buf[:, n] = acc
    return buf[:, :length]


def int_to_seed(value: int, degree: int) -> tuple[int, ...]:
    """Big-endian bits of ``value``; used to enumerate key spaces."""
    if not 0 <= value < (1 << degree):
        raise KeystreamError(f"key value {value} does not fit in {degree} bits")
    return tuple((value >> (degree - 1 - i)) & 1 for i in range(degree))


def seeds_array(values: Sequence[int], degree: int) -> np.ndarray:
    v = np.asarray(values, dtype=np.int64)[:, None]
    shifts = np.arange(degree - 1, -1, -1, dtype=np.int64)[None, :]
    return ((v >> shifts) & 1).astype(np.uint8)


# -- symbol selectors -------------------------------------------------------

@dataclass(frozen=True)
class SymbolSelector:
    basis: int
    polarity: int = 0


def basis_bits(M: int) -> int:
    """Bits needed to address the ``M/2`` bases; rejects non-powers of two."""
    if M < 4 or M % 2:
        raise UnsupportedConstellationError(f"M must be even and >= 4, got {M}")
    half = M // 2
    if half & (half - 1):
        raise UnsupportedConstellationError(f"M/2 = {half} is not a power of two")
    return half.bit_length() - 1


def bits_per_symbol(M: int, polarity: bool) -> int:
    return basis_bits(M) + (1 if polarity else 0)


def chunk_running_key(kprime, M: int, polarity: bool) -> list[SymbolSelector]:
    """Cut the running key into per-symbol selectors.

    Each chunk is ``[polarity] + basis bits (big-endian)``.
    """
    bits = kprime.bits if isinstance(kprime, RunningKey) else _bits(kprime)
    w = bits_per_symbol(M, polarity)
    if len(bits) % w:
        raise LengthMismatchError(f"{len(bits)} key bits do not split into {w}-bit symbols")
    out = []
    nb = w - 1 if polarity else w
    for i in range(0, len(bits), w):
        chunk = bits[i:i + w]
        p = chunk[0] if polarity else 0
        basis = 0
        for b in chunk[w - nb:]:
            basis = (basis << 1) | b
        out.append(SymbolSelector(basis, p))
    return out


def selector_arrays(bits, M: int, polarity: bool) -> tuple[np.ndarray, np.ndarray]:
    """Array form of :func:`chunk_running_key`: ``(basis, polarity)`` vectors.

    Accepts a ``(..., L)`` bit array; chunking acts on the last axis.
    """
    arr = np.asarray(bits.bits if isinstance(bits, RunningKey) else bits, dtype=np.int64)
    w = bits_per_symbol(M, polarity)
    if arr.shape[-1] % w:
        raise LengthMismatchError(f"{arr.shape[-1]} key bits do not split into {w}-bit symbols")
    chunks = arr.reshape(arr.shape[:-1] + (arr.shape[-1] // w, w))
    nb = w - 1 if polarity else w
    weights = 1 << np.arange(nb - 1, -1, -1)
    basis = (chunks[..., w - nb:] * weights).sum(axis=-1)
    pol = chunks[..., 0] if polarity else np.zeros_like(basis)
    return basis, pol


def selector_bits(selectors: Sequence[SymbolSelector], M: int, polarity: bool) -> tuple[int, ...]:
    """Inverse of :func:`chunk_running_key`."""
    nb = basis_bits(M)
    out: list[int] = []
    for s in selectors:
        if polarity:
            out.append(s.polarity)
        out.extend((s.basis >> (nb - 1 - i)) & 1 for i in range(nb))
    return tuple(out)


def running_selectors(spec: LfsrSpec, seed, n: int, M: int, polarity: bool,
                      mode: str = "running") -> tuple[np.ndarray, np.ndarray]:
    """Per-symbol ``(basis, polarity)`` arrays for ``n`` symbols.

    ``mode="running"`` expands the seed into ``n`` fresh chunks; ``"direct"``
    reuses the seed itself as the single chunk for every symbol (the seed must
    then be exactly one chunk long).
    """
    w = bits_per_symbol(M, polarity)
    if mode == "running":
        return selector_arrays(expand_key(spec, seed, n * w), M, polarity)
    if mode == "direct":
        seed = _bits(seed)
        if len(seed) != w:
            raise LengthMismatchError(f"direct keying needs a {w}-bit key, got {len(seed)}")
        b, p = selector_arrays(seed, M, polarity)
        return np.repeat(b, n), np.repeat(p, n)
    raise KeystreamError(f"unknown key mode {mode!r}")


# -- Berlekamp-Massey ------------------------------------------------------

@dataclass(frozen=True)
class LfsrSolution:
    """Shortest LFSR found by Berlekamp-Massey.

    ``taps`` are the nonzero exponents of the connection polynomial; the
    degree tap may be absent when the minimal register is singular.
    """
    complexity: int
    taps: frozenset[int] = field(default_factory=frozenset)

    def regenerate(self, initial: Sequence[int], length: int) -> list[int]:
        L = self.complexity
        initial = list(_bits(initial))
        if len(initial) < L:
            raise KeystreamError(f"need {L} initial bits")
        out = initial[:L]
        if L == 0:
            return [0] * length
        while len(out) < length:
            n = len(out)
            b = 0
            for t in self.taps:
                b ^= out[n - t]
            out.append(b)
        return out[:length]

    def as_spec(self) -> LfsrSpec:
        return LfsrSpec(self.complexity, self.taps)


def berlekamp_massey(bits) -> LfsrSolution:
    """Shortest binary LFSR generating ``bits`` (Massey 1969)."""
    s = list(_bits(bits))
    if not s:
        raise KeystreamError("Berlekamp-Massey needs a nonempty sequence")
    n = len(s)
    c = [1] + [0] * n
    b = [1] + [0] * n
    L, m = 0, 1
    for i in range(n):
        d = s[i]
        for j in range(1, L + 1):
            d ^= c[j] & s[i - j]
        if d == 0:
            m += 1
            continue
        t = c[:]
        for j in range(n + 1 - m):
            c[j + m] ^= b[j]
        if 2 * L <= i:
            L = i + 1 - L
            b = t
            m = 1
        else:
            m += 1
    taps = frozenset(j for j in range(1, L + 1) if c[j])
    return LfsrSolution(L, taps)


def recover_seed_key(observed, degree: int | None = None) -> tuple[LfsrSolution, tuple[int, ...]]:
    """Known-keystream attack: recover register and seed from ``2L`` bits."""
    sol = berlekamp_massey(observed)
    if degree is not None and sol.complexity != degree:
        raise KeystreamError(f"linear complexity {sol.complexity} differs from degree {degree}")
    seed = tuple(_bits(observed)[:sol.complexity])
    return sol, seed


# -- serialisation ---------------------------------------------------------

def bits_to_hex(bits: Sequence[int]) -> str:
    """``"<nbits>:<hex>"``; bits are packed MSB-first and zero padded."""
    bits = list(bits)
    n = len(bits)
    pad = (-n) % 8
    packed = np.packbits(np.array(bits + [0] * pad, dtype=np.uint8)) if n else b""
    return f"{n}:{bytes(packed).hex()}"


def hex_to_bits(text: str) -> tuple[int, ...]:
    n_str, _, hx = text.partition(":")
    n = int(n_str)
    if n == 0:
        return ()
    raw = np.unpackbits(np.frombuffer(bytes.fromhex(hx), dtype=np.uint8))
    if raw.size < n:
        raise KeystreamError("hex payload shorter than declared length")
    return tuple(int(b) for b in raw[:n])
