"""Information-theoretic bookkeeping for generated keys.

Everything here is in bits.  Functions are pure and cheap; the brute-force
checks at the bottom draw random small distributions and report the worst
violation of each inequality.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from . import rng as rngmod

_SUM_TOL = 1e-9
_JOINT_TOL = 1e-12


class InvariantError(ValueError):
    pass


class DomainError(ValueError):
    pass


def h2(p: float) -> float:
    """Binary entropy."""
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def entropy(probs) -> float:
    p = np.asarray(probs, dtype=float).ravel()
    p = p[p > 0]
    return float(-np.sum(p * np.log2(p)))


@dataclass(frozen=True, eq=False)
class ErrorProfile:
    """Descending guess probabilities ``p_1 >= p_2 >= ...``.

    ``size`` is the number of candidate keys; entries past ``len(probs)`` are
    implicit zeros so that a profile over ``2**100`` keys stays small.
    """
    probs: np.ndarray
    size: int | None = None

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        if p.ndim != 1 or p.size == 0:
            raise InvariantError("profile must be a nonempty vector")
        if np.any(p < 0) or np.any(p > 1):
            raise InvariantError("profile entries must lie in [0, 1]")
        if np.any(np.diff(p) > 0):
            raise InvariantError("profile must be in descending order")
        if abs(p.sum() - 1.0) > _SUM_TOL:
            raise InvariantError(f"profile sums to {p.sum():.12g}, not 1")
        size = p.size if self.size is None else int(self.size)
        if size < p.size:
            raise InvariantError("size smaller than the stored entries")
        object.__setattr__(self, "probs", p)
        object.__setattr__(self, "size", size)

    @classmethod
    def from_weights(cls, weights, size: int | None = None) -> "ErrorProfile":
        """Normalise and sort arbitrary nonnegative weights."""
        w = np.asarray(weights, dtype=float)
        if np.any(w < 0) or w.sum() <= 0:
            raise InvariantError("weights must be nonnegative and not all zero")
        return cls(np.sort(w / w.sum())[::-1], size)

    @property
    def p1(self) -> float:
        return float(self.probs[0])

    def entropy(self) -> float:
        return entropy(self.probs)

    def information(self, n: int) -> float:
        """``n - H(profile)``: the attacker's information on an ``n``-bit key."""
        return n - self.entropy()


def trial_complexity(profile: ErrorProfile) -> float:
    """Expected number of guesses when trying keys in profile order."""
    if not isinstance(profile, ErrorProfile):
        profile = ErrorProfile(profile)
    n = np.arange(1, profile.probs.size + 1)
    return float(np.dot(n, profile.probs))


def _log2_mersenne(n: int) -> float:
    """``log2(2**n - 1)`` without overflow."""
    return n + math.log1p(-(2.0 ** -n)) / math.log(2)


def solve_p1_given_info(n: int, I_E: float) -> float:
    """Largest first-guess probability compatible with ``I_E`` bits of information.

    Solves ``H2(p) + (1 - p) log2(2**n - 1) = n - I_E`` on ``[2**-n, 1]``; the
    left side falls monotonically there, so the root is unique.
    """
    if n < 1:
        raise DomainError("n must be at least 1")
    if not 0.0 <= I_E <= n:
        raise DomainError(f"I_E={I_E} outside [0, {n}]")
    lm = _log2_mersenne(n)
    target = n - I_E

    def f(p):
        return h2(p) + (1 - p) * lm - target

    lo = 2.0 ** -n
    if f(lo) <= 0:
        return lo
    if f(1.0) >= 0:
        return 1.0
    return brentq(f, lo, 1.0, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)


def h2_inverse(h: float) -> float:
    """Branch of the inverse binary entropy on ``[0, 1/2]``."""
    if not 0.0 <= h <= 1.0:
        raise DomainError(f"entropy {h} outside [0, 1]")
    if h == 0.0:
        return 0.0
    if h == 1.0:
        return 0.5
    return brentq(lambda p: h2(p) - h, 0.0, 0.5, xtol=1e-300, rtol=4 * np.finfo(float).eps)


def fano_bound(I: float, n: float) -> float:
    """Lower bound on the attacker's per-bit error from ``I`` bits on ``n`` bits."""
    if n <= 0:
        raise DomainError("n must be positive")
    return h2_inverse(max(0.0, 1.0 - I / n))


@dataclass(frozen=True)
class ProfileBounds:
    max_info: float
    min_trial_complexity: float
    extremal_profile: ErrorProfile


def profile_bounds(l: int, n: int) -> ProfileBounds:
    """Limits implied by ``p_1 <= 2**-l`` on an ``n``-bit key."""
    if not 0 <= l <= n:
        raise DomainError(f"need 0 <= l <= n, got l={l}, n={n}")
    if l > 24:
        raise DomainError("extremal profile would need more than 2**24 entries")
    head = np.full(1 << l, 2.0 ** -l)
    return ProfileBounds(float(n - l), ((1 << l) + 1) / 2, ErrorProfile(head, size=2 ** n))


# -- discrete joints -------------------------------------------------------

QUERIES = ("I(X;Y)", "I(X;YK)", "I(X;Y|K)", "I(X;K)", "H(X|Y)", "H(K)")


@dataclass(frozen=True, eq=False)
class DiscreteJoint:
    """Joint law of ``(X, Y, K)`` as a tensor of shape ``(|X|, |Y|, |K|)``."""
    p: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float)
        if p.ndim == 2:
            p = p[:, :, None]
        if p.ndim != 3:
            raise InvariantError("joint must have three axes (X, Y, K)")
        if np.any(p < 0):
            raise InvariantError("joint has negative entries")
        if abs(p.sum() - 1.0) > _JOINT_TOL:
            raise InvariantError(f"joint sums to {p.sum():.15g}")
        object.__setattr__(self, "p", p)

    @property
    def dims(self) -> tuple[int, int, int]:
        return self.p.shape

    def H(self, axes: str) -> float:
        """Entropy of the marginal on the named subset of ``"XYK"``."""
        keep = {"XYK".index(a) for a in axes}
        drop = tuple(i for i in range(3) if i not in keep)
        return entropy(self.p.sum(axis=drop) if drop else self.p)


def discrete_information(joint: DiscreteJoint, query: str) -> float:
    H = joint.H
    if query == "I(X;Y)":
        return H("X") + H("Y") - H("XY")
    if query == "I(X;YK)":
        return H("X") + H("YK") - H("XYK")
    if query == "I(X;Y|K)":
        return H("XK") + H("YK") - H("XYK") - H("K")
    if query == "I(X;K)":
        return H("X") + H("K") - H("XK")
    if query == "H(X|Y)":
        return H("XY") - H("Y")
    if query == "H(K)":
        return H("K")
    raise ValueError(f"unknown query {query!r}; expected one of {QUERIES}")


def xor_cipher_joint(bits: int, px=None, pk=None) -> DiscreteJoint:
    """``Y = X xor K`` with independent ``X`` and ``K`` on ``bits``-bit words."""
    N = 1 << bits
    px = np.full(N, 1 / N) if px is None else np.asarray(px, dtype=float)
    pk = np.full(N, 1 / N) if pk is None else np.asarray(pk, dtype=float)
    p = np.zeros((N, N, N))
    x, k = np.meshgrid(np.arange(N), np.arange(N), indexing="ij")
    p[x, x ^ k, k] = px[:, None] * pk[None, :]
    return DiscreteJoint(p)


# -- bookkeeping -----------------------------------------------------------

def keygen_efficiency(R: float, Km: float, n: int, I_E: float, Kv: float, m: int,
                      keyReused: bool = False) -> float:
    """Net generated key bits per channel use."""
    if min(R, Km, I_E, Kv) < 0:
        raise DomainError("rates and key lengths must be nonnegative")
    if n < 1 or m < 1:
        raise DomainError("n and m must be at least 1")
    eff = R - I_E / n - Kv / (m * n)
    return eff if keyReused else eff - Km / n


def splitting_cheat_probability(pB: float, pE: float) -> float:
    for name, v in (("pB", pB), ("pE", pE)):
        if not 0.0 <= v <= 1.0:
            raise DomainError(f"{name}={v} outside [0, 1]")
    return pB * pE


@dataclass(frozen=True)
class RateVerdict:
    window_ok: bool
    lower_margin: float
    upper_margin: float
    delta_info: float
    key_ok: bool
    key_margin: float

    def to_json(self) -> dict:
        return {
            "windowSatisfied": self.window_ok,
            "lowerMargin": self.lower_margin,
            "upperMargin": self.upper_margin,
            "deltaInfo": self.delta_info,
            "netKeySatisfied": self.key_ok,
            "keyMargin": self.key_margin,
        }


def rate_window_check(I_BE: float, I_AB: float, R: float, keyBits: float, n: int) -> RateVerdict:
    """Check ``I_BE/n < R < I_AB/n`` and ``keyBits < I_AB - I_BE``.

    ``I_BE`` and ``I_AB`` are block informations in bits over ``n`` uses.
    """
    if min(I_BE, I_AB, R, keyBits) < 0 or n < 1:
        raise DomainError("inputs must be nonnegative and n >= 1")
    lo = R - I_BE / n
    hi = I_AB / n - R
    delta = I_AB - I_BE
    return RateVerdict(lo > 0 and hi > 0, lo, hi, delta, keyBits < delta, delta - keyBits)


def error_exponent(x, p) -> tuple[float, float]:
    """Least-squares fit of ``p ~ c * exp(-eps * x)``; returns ``(eps, c)``."""
    x = np.asarray(x, dtype=float)
    p = np.asarray(p, dtype=float)
    ok = p > 0
    if ok.sum() < 2:
        raise ValueError("need at least two positive error rates")
    slope, icpt = np.polyfit(x[ok], np.log(p[ok]), 1)
    return float(-slope), float(math.exp(icpt))


# -- brute-force suites ----------------------------------------------------

@dataclass
class CheckSummary:
    """Worst violation of each inequality (positive means violated)."""
    draws: int
    worst: dict[str, float] = field(default_factory=dict)

    def update(self, name: str, value: float):
        self.worst[name] = max(self.worst.get(name, -math.inf), float(value))

    def passed(self, tol: float = 1e-9) -> bool:
        return all(v <= tol for v in self.worst.values())


def random_joint(g: np.random.Generator, max_dim: int = 4) -> DiscreteJoint:
    dims = g.integers(1, max_dim + 1, 3)
    w = g.exponential(size=tuple(dims))
    # sparsify sometimes so deterministic relations show up
    if g.random() < 0.3:
        w *= g.random(w.shape) < 0.5
        if w.sum() == 0:
            w.flat[0] = 1.0
    return DiscreteJoint(w / w.sum())


def joint_checks(draws: int = 10_000, seed: int = 0) -> CheckSummary:
    """Random joints against the key-information inequality and chain rule."""
    g = rngmod.stream(seed, "metrics-joints", 0)
    out = CheckSummary(draws)
    for _ in range(draws):
        j = random_joint(g)
        ixyk = discrete_information(j, "I(X;YK)")
        ixy = discrete_information(j, "I(X;Y)")
        hk = discrete_information(j, "H(K)")
        out.update("I(X;YK) <= I(X;Y) + H(K)", ixyk - ixy - hk)
        chain = discrete_information(j, "I(X;Y|K)") + discrete_information(j, "I(X;K)")
        out.update("I(X;YK) = I(X;Y|K) + I(X;K)", abs(ixyk - chain))
        # intermediate step: I(X;K|Y) <= H(K|Y) <= H(K)
        ixk_y = ixyk - ixy
        out.update("I(X;K|Y) <= H(K|Y)", ixk_y - (j.H("YK") - j.H("Y")))
        out.update("H(K|Y) <= H(K)", j.H("YK") - j.H("Y") - hk)
    for bits in (1, 2, 3):
        for trial in range(3):
            px = g.dirichlet(np.ones(1 << bits))
            pk = g.dirichlet(np.ones(1 << bits)) if trial else None
            j = xor_cipher_joint(bits, px, pk)
            out.update("xor: H(X|Y) <= H(K)",
                       discrete_information(j, "H(X|Y)") - discrete_information(j, "H(K)"))
        # uniform pad: equality in the key-information inequality
        j = xor_cipher_joint(bits)
        gap = discrete_information(j, "I(X;Y)") + discrete_information(j, "H(K)") \
            - discrete_information(j, "I(X;YK)")
        out.update("pad: equality", abs(gap))
    return out


def capped_profile(g: np.random.Generator, n: int, l: int) -> ErrorProfile:
    """Random profile over ``2**n`` keys with ``p_1 <= 2**-l``.

    A Dirichlet draw on a random support of at least ``2**l`` keys is pulled
    toward uniform on that support until the cap holds, then scaled back by a
    random factor so interior points are reached too.
    """
    N = 1 << n
    cap = 2.0 ** -l
    s = int(g.integers(1 << l, N + 1))
    w = g.dirichlet(np.full(s, g.uniform(0.2, 3.0)))
    u = 1.0 / s
    top = w.max()
    lam = 1.0 if top <= cap else (cap - u) / (top - u)
    lam *= g.random() ** 0.25
    p = lam * w + (1 - lam) * u
    p = np.minimum(p, cap)  # guard against rounding above the cap
    return ErrorProfile.from_weights(p, size=N)


def profile_checks(draws: int = 10_000, seed: int = 0, l: int = 3, n: int = 6) -> CheckSummary:
    """Random profiles with ``p_1 <= 2**-l`` against the guessing bounds."""
    if not 0 <= l <= n <= 12:
        raise DomainError("need 0 <= l <= n <= 12")
    g = rngmod.stream(seed, "metrics-profiles", l * 64 + n)
    bounds = profile_bounds(l, n)
    out = CheckSummary(draws)
    for _ in range(draws):
        prof = capped_profile(g, n, l)
        out.update("p_1 <= 2^-l", prof.p1 - 2.0 ** -l)
        out.update("C_t >= (2^l + 1)/2", bounds.min_trial_complexity - trial_complexity(prof))
        out.update("I <= n - l", prof.information(n) - bounds.max_info)
    out.update("extremal C_t exact",
               abs(trial_complexity(bounds.extremal_profile) - bounds.min_trial_complexity))
    return out
