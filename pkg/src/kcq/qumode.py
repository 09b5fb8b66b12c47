"""Coherent-state receiver numerics.

Noise normalisation: heterodyne returns ``alpha + w`` with ``E|w|^2 = 1``;
homodyne along phase ``phi`` returns ``Re(alpha e^{-i phi}) + g`` with
``Var g = 1/4``.  With these, thresholding gives ``Q(sqrt(2S))`` and
``Q(2 sqrt(S))`` for antipodal signals, whose exponents are ``e^{-S}`` and
``e^{-2S}``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erfc, gammaln

TAIL_LIMIT = 1e-8

HETERODYNE = "heterodyne"
HOMODYNE = "homodyne"

RECEIVERS = ("optimalExact", "optimalApprox", "kennedy", "heterodyneApprox", "phaseApprox")


class TruncationError(ValueError):
    pass


@dataclass(frozen=True)
class CoherentAmplitude:
    alpha: complex

    def __post_init__(self):
        a = complex(self.alpha)
        if not (math.isfinite(a.real) and math.isfinite(a.imag)):
            raise ValueError("amplitude must be finite")
        object.__setattr__(self, "alpha", a)

    @classmethod
    def polar(cls, S: float, phase: float) -> "CoherentAmplitude":
        return cls(math.sqrt(S) * complex(math.cos(phase), math.sin(phase)))

    @property
    def S(self) -> float:
        return abs(self.alpha) ** 2

    @property
    def phase(self) -> float:
        return math.atan2(self.alpha.imag, self.alpha.real)


def qfunc(x):
    """Gaussian tail ``P(N(0,1) > x)``."""
    return 0.5 * erfc(np.asarray(x) / math.sqrt(2.0))


def _alpha(a) -> complex:
    return a.alpha if isinstance(a, CoherentAmplitude) else complex(a)


def heterodyne(amps, rng: np.random.Generator) -> np.ndarray:
    """Heterodyne every entry of ``amps``: unit-energy circular noise per mode."""
    amps = np.asarray(amps, dtype=complex)
    w = rng.standard_normal(amps.shape + (2,)) * math.sqrt(0.5)
    return amps + w[..., 0] + 1j * w[..., 1]


def homodyne(amps, phase, rng: np.random.Generator) -> np.ndarray:
    amps = np.asarray(amps, dtype=complex)
    mean = (amps * np.exp(-1j * np.asarray(phase))).real
    return mean + 0.5 * rng.standard_normal(np.shape(mean))


def gaussian_receiver_sample(alpha, kind: str, rng: np.random.Generator, phase: float = 0.0,
                             size=None):
    """Draw heterodyne (complex) or homodyne (real) outcomes for one amplitude."""
    a = _alpha(alpha)
    shape = () if size is None else size
    if kind == HETERODYNE:
        out = heterodyne(np.full(shape, a), rng)
    elif kind == HOMODYNE:
        out = homodyne(np.full(shape, a), phase, rng)
    else:
        raise ValueError(f"unknown receiver kind {kind!r}")
    return out[()] if size is None else out


def bpsk_ber(S: float, receiver: str) -> float:
    """Bit error of ``{|sqrt S>, |-sqrt S>}`` for the named receiver formula."""
    if S < 0:
        raise ValueError(f"photon number must be nonnegative, got {S}")
    if receiver == "optimalExact":
        x = math.exp(-4 * S)
        # 1 - sqrt(1 - x) written to avoid cancellation
        return 0.5 * x / (1 + math.sqrt(1 - x))
    if receiver == "optimalApprox":
        return 0.25 * math.exp(-4 * S)
    if receiver == "kennedy":
        return 0.5 * math.exp(-4 * S)
    if receiver == "heterodyneApprox":
        return 0.5 * math.exp(-S)
    if receiver == "phaseApprox":
        return 0.5 * math.exp(-2 * S)
    raise ValueError(f"unknown receiver {receiver!r}")


def heterodyne_bpsk_exact(S: float) -> float:
    """Threshold error of heterodyne on antipodal states, ``Q(sqrt(2S))``."""
    return float(qfunc(math.sqrt(2 * S)))


def homodyne_bpsk_exact(S: float) -> float:
    return float(qfunc(2 * math.sqrt(S)))


def coherent_overlap_sq(alpha, beta) -> float:
    return math.exp(-abs(_alpha(alpha) - _alpha(beta)) ** 2)


def coherent_helstrom(alpha, beta) -> float:
    """Minimum error for two equiprobable pure coherent states."""
    x = coherent_overlap_sq(alpha, beta)
    return 0.5 * x / (1 + math.sqrt(1 - x))


def kennedy_offset_ber(S: float, theta: float) -> float:
    """Kennedy error bound for a signal rotated by ``theta`` off its keyed axis.

    Provisional: the source expression is typographically incomplete; the
    denominator is read as ``(1 - cos theta)**2``.
    """
    c = math.cos(theta)
    den = (1 - c) ** 2
    if den == 0:
        return 0.0
    return math.exp(-2 * S * c * c / den)


def heterodyne_offset_ber(S: float, theta: float) -> float:
    return 0.5 * math.exp(-S * math.cos(theta) ** 2)


# -- truncated Fock space --------------------------------------------------

def cutoff_rule(S: float) -> int:
    """Smallest Fock cutoff the module accepts for photon number ``S``."""
    return int(math.ceil(S + 6 * math.sqrt(S) + 10))


@dataclass(frozen=True, eq=False)
class TruncatedFockVector:
    coefficients: np.ndarray

    @property
    def cutoff(self) -> int:
        return len(self.coefficients)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.coefficients))

    def density(self) -> np.ndarray:
        c = self.coefficients
        return np.outer(c, c.conj())


def coherent_fock(alpha, cutoff: int, check: bool = True) -> TruncatedFockVector:
    """Fock coefficients ``e^{-S/2} alpha^n / sqrt(n!)`` for ``n < cutoff``."""
    a = _alpha(alpha)
    n = np.arange(cutoff)
    S = abs(a) ** 2
    if a == 0:
        c = np.zeros(cutoff, dtype=complex)
        c[0] = 1.0
    else:
        mag = np.exp(-S / 2 + n * math.log(abs(a)) - 0.5 * gammaln(n + 1))
        c = mag * np.exp(1j * n * math.atan2(a.imag, a.real))
    vec = TruncatedFockVector(c)
    if check:
        tail = 1.0 - float(np.sum(np.abs(c) ** 2))
        if tail > TAIL_LIMIT:
            raise TruncationError(f"cutoff {cutoff} leaves tail mass {tail:.3g} for S={S:g}")
    return vec


def _require_cutoff(S: float, cutoff: int):
    need = cutoff_rule(S)
    if cutoff < need:
        raise TruncationError(f"cutoff {cutoff} below the required {need} for S={S:g}")


@dataclass(frozen=True, eq=False)
class PhaseDistribution:
    theta: np.ndarray
    density: np.ndarray
    center: float

    @property
    def step(self) -> float:
        return 2 * np.pi / len(self.theta)

    def total(self) -> float:
        return float(self.density.sum() * self.step)

    def rms_width(self) -> float:
        """Circular rms deviation about ``center`` (offsets wrapped to (-pi, pi])."""
        d = np.angle(np.exp(1j * (self.theta - self.center)))
        return float(np.sqrt(np.sum(d * d * self.density) * self.step))

    def half_width(self) -> float:
        """Half width at half maximum, linearly interpolated on the grid."""
        d = np.angle(np.exp(1j * (self.theta - self.center)))
        order = np.argsort(d)
        d, p = d[order], self.density[order]
        k = int(np.argmax(p))
        half = p[k] / 2
        right = k + int(np.argmax(p[k:] < half))
        left = k - int(np.argmax(p[k::-1] < half))
        if p[right] >= half or p[left] >= half:
            raise ValueError("density never drops to half its peak")

        def cross(i, j):
            return d[i] + (half - p[i]) * (d[j] - d[i]) / (p[j] - p[i])

        return 0.5 * (cross(right - 1, right) - cross(left + 1, left))

    def rows(self):
        return list(zip(self.theta.tolist(), self.density.tolist()))


def phase_pom_distribution(alpha, cutoff: int, grid_size: int = 1024) -> PhaseDistribution:
    """Canonical phase density ``|sum_n c_n e^{-i n theta}|^2 / (2 pi)``.

    The sign in the exponent places the peak at ``arg(alpha)``.  The grid is
    ``theta_j = 2 pi j / grid_size``; with ``grid_size >= cutoff`` the grid sum
    is an exact quadrature of the normalisation.
    """
    a = _alpha(alpha)
    _require_cutoff(abs(a) ** 2, cutoff)
    if grid_size < 256:
        raise ValueError("grid_size must be at least 256")
    if grid_size < cutoff:
        raise ValueError("grid_size must not be smaller than the cutoff")
    c = coherent_fock(a, cutoff).coefficients
    amp = np.fft.fft(c, n=grid_size)
    dens = np.abs(amp) ** 2 / (2 * np.pi)
    theta = 2 * np.pi * np.arange(grid_size) / grid_size
    return PhaseDistribution(theta, dens, math.atan2(a.imag, a.real))


def _fock_autocorrelation(c: np.ndarray) -> np.ndarray:
    """``r[k] = sum_n c[n+k] conj(c[n])`` for ``k = 0 .. N-1``."""
    N = len(c)
    full = np.correlate(c, c, mode="full")  # full[N-1+k] = sum_n c[n+k] conj(c[n])
    return full[N - 1:]


def phase_pom_bpsk_ber(S: float, cutoff: int | None = None) -> float:
    """Error of deciding the sign of ``+-sqrt(S)`` from the canonical phase.

    Integrates the phase density of ``|sqrt S>`` over the half circle
    ``(pi/2, 3pi/2)`` in closed form term by term.
    """
    cutoff = cutoff or cutoff_rule(S)
    _require_cutoff(S, cutoff)
    c = coherent_fock(math.sqrt(S), cutoff).coefficients
    r = _fock_autocorrelation(c)
    k = np.arange(1, len(r))
    # integral over (pi/2, 3pi/2) of e^{-ik t} + e^{ik t}, divided by 2 pi
    weights = 2 * (np.sin(1.5 * np.pi * k) - np.sin(0.5 * np.pi * k)) / k
    err = (r[0].real * np.pi + np.sum(r[1:].real * weights)) / (2 * np.pi)
    return float(err)
