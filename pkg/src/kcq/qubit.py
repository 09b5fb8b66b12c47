"""Single-qubit states on a Bloch great circle and their discrimination.

The great circle is the x-z plane: circle angle ``t`` is the Bloch vector
``(sin t, 0, cos t)``.  Antipodal angles are orthogonal states.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .keystream import basis_bits

_TOL = 1e-12

ALTERNATING = "alternatingNeighbors"
SEMICIRCLE = "semicircleBlocks"
CONVENTIONS = (ALTERNATING, SEMICIRCLE)


class InvariantError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class DensityMatrix2:
    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.shape != (2, 2):
            raise InvariantError("density matrix must be 2x2")
        if np.max(np.abs(m - m.conj().T)) > _TOL:
            raise InvariantError("density matrix is not Hermitian")
        if abs(np.trace(m) - 1) > _TOL:
            raise InvariantError("density matrix trace differs from 1")
        if min(_eig2(m)) < -_TOL:
            raise InvariantError("density matrix has a negative eigenvalue")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def from_bloch(cls, r) -> "DensityMatrix2":
        x, y, z = r
        return cls(0.5 * np.array([[1 + z, x - 1j * y], [x + 1j * y, 1 - z]]))

    @property
    def bloch(self) -> np.ndarray:
        m = self.matrix
        return np.array([2 * m[0, 1].real, -2 * m[0, 1].imag, (m[0, 0] - m[1, 1]).real])

    def purity(self) -> float:
        return float(np.trace(self.matrix @ self.matrix).real)

    def to_json(self) -> list[list[float]]:
        """Entries 00, 01, 10, 11 as ``[re, im]`` pairs."""
        return [[float(z.real), float(z.imag)] for z in self.matrix.ravel()]

    @classmethod
    def from_json(cls, pairs) -> "DensityMatrix2":
        return cls(np.array([complex(a, b) for a, b in pairs]).reshape(2, 2))

    def __repr__(self):
        return f"DensityMatrix2(bloch={np.round(self.bloch, 12).tolist()})"


def _eig2(h: np.ndarray) -> tuple[float, float]:
    """Eigenvalues of a 2x2 Hermitian matrix in closed form."""
    a, d = float(h[0, 0].real), float(h[1, 1].real)
    mid = 0.5 * (a + d)
    rad = math.hypot(0.5 * (a - d), float(abs(h[0, 1])))
    return mid - rad, mid + rad


MAXIMALLY_MIXED = DensityMatrix2(np.eye(2) / 2)


def _as_matrix(rho) -> np.ndarray:
    if isinstance(rho, DensityMatrix2):
        return rho.matrix
    m = np.asarray(rho, dtype=complex)
    if m.shape != (2, 2) or np.max(np.abs(m - m.conj().T)) > _TOL:
        raise InvariantError("expected a Hermitian 2x2 operator")
    return m


def state_on_circle(angle: float) -> DensityMatrix2:
    return DensityMatrix2.from_bloch((math.sin(angle), 0.0, math.cos(angle)))


def trace_norm(h) -> float:
    """Sum of absolute eigenvalues of a Hermitian 2x2 operator."""
    lo, hi = _eig2(_as_matrix(h))
    return abs(lo) + abs(hi)


def trace_distance(rho, sigma) -> float:
    """``||rho - sigma||_1`` (no factor 1/2)."""
    return trace_norm(_as_matrix(rho) - _as_matrix(sigma))


def helstrom_error(rho0, rho1, p0: float = 0.5) -> float:
    """Minimum error probability for deciding between two weighted states."""
    if not 0.0 <= p0 <= 1.0:
        raise ValueError(f"prior {p0} outside [0, 1]")
    gamma = (1 - p0) * _as_matrix(rho1) - p0 * _as_matrix(rho0)
    return 0.5 * (1.0 - trace_norm(gamma))


def helstrom_angle(rho0, rho1, p0: float = 0.5) -> float:
    """Circle angle of the projector that attains :func:`helstrom_error`.

    Outcome along the returned angle decides 0.  Only meaningful for states
    whose Bloch vectors lie in the x-z plane.
    """
    r0 = DensityMatrix2(_as_matrix(rho0)).bloch
    r1 = DensityMatrix2(_as_matrix(rho1)).bloch
    v = p0 * r0 - (1 - p0) * r1
    return math.atan2(v[0], v[2])


@dataclass(frozen=True)
class QkConstellation:
    """``M`` points at circle angles ``2*pi*l/M``; basis ``j`` is ``{j, j+M/2}``."""
    M: int
    convention: str = SEMICIRCLE
    polarity: bool = False

    def __post_init__(self):
        if self.M < 4 or self.M % 2:
            raise ValueError(f"M must be even and >= 4, got {self.M}")
        if self.convention not in CONVENTIONS:
            raise ValueError(f"unknown bit convention {self.convention!r}")

    def check_keyable(self) -> int:
        """Basis bits per symbol; raises unless ``M/2`` is a power of two."""
        return basis_bits(self.M)

    def angles(self) -> np.ndarray:
        return 2 * np.pi * np.arange(self.M) / self.M

    def bit_labels(self) -> np.ndarray:
        """Data bit carried by each point when the polarity bit is 0."""
        l = np.arange(self.M)
        if self.convention == ALTERNATING:
            return l % 2
        return (l >= self.M // 2).astype(int)


@dataclass(frozen=True)
class EveStates:
    rho0: DensityMatrix2
    rho1: DensityMatrix2
    cipher: DensityMatrix2


def _average(angles) -> DensityMatrix2:
    if len(angles) == 0:
        raise ValueError("empty average")
    r = np.array([[math.sin(a), 0.0, math.cos(a)] for a in angles]).mean(axis=0)
    r[np.abs(r) < 1e-15] = 0.0
    return DensityMatrix2.from_bloch(r)


def qk_eve_states(c: QkConstellation) -> EveStates:
    """Key-averaged single-qubit states seen by an attacker without the key.

    With the polarity bit on, each point carries either bit value with equal
    probability, so both conditional states are the full-circle average.
    """
    ang = c.angles()
    cipher = _average(ang)
    if c.polarity:
        return EveStates(cipher, cipher, cipher)
    lab = c.bit_labels()
    return EveStates(_average(ang[lab == 0]), _average(ang[lab == 1]), cipher)


def eve_ber_formula(M: int) -> float:
    """Closed-form constant-individual-attack bit error for ``M`` points."""
    if M % 2:
        raise ValueError(f"M must be even, got {M}")
    if M < 4:
        raise ValueError(f"formula needs M >= 4, got {M}")
    x = math.pi / M
    return 0.5 - (1.0 / M) * math.sqrt((1 - math.cos(x)) / (2 * math.sin(x) ** 2))


@dataclass(frozen=True)
class BerComparison:
    M: int
    convention: str
    numeric: float
    formula: float
    trace_distance: float

    @property
    def mismatch(self) -> float:
        return self.numeric - self.formula


def eve_ber_numeric(c: QkConstellation) -> BerComparison:
    st = qk_eve_states(c)
    return BerComparison(
        M=c.M,
        convention=c.convention,
        numeric=helstrom_error(st.rho0, st.rho1, 0.5),
        formula=eve_ber_formula(c.M),
        trace_distance=trace_distance(st.rho0, st.rho1),
    )


def eve_qubit_ber(M: int, mode: str = "formula", constellation: QkConstellation | None = None):
    """Eve's single-qubit bit error.

    ``mode="formula"`` returns the printed closed form as a float;
    ``mode="numeric"`` returns a :class:`BerComparison` holding both the
    Helstrom value of the key-averaged states and the closed form.
    """
    if M % 2:
        raise ValueError(f"M must be even, got {M}")
    if mode == "formula":
        return eve_ber_formula(M)
    if mode == "numeric":
        c = constellation or QkConstellation(M)
        if c.M != M:
            raise ValueError("constellation size differs from M")
        return eve_ber_numeric(c)
    raise ValueError(f"unknown mode {mode!r}")
