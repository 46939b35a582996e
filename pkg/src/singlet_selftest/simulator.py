"""Dense state-vector simulation: correlators, the swap isometry and rho_swap.

Tensor factors are always ordered ``(A, B, A', B')``: the two untrusted systems
first, then Alice's and Bob's trusted ancilla qubits.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch

I2 = np.eye(2)
SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]])
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]])
KET0 = np.array([1.0, 0.0])
KET1 = np.array([0.0, 1.0])

_FLAG_TOL = 1e-10


@dataclass(frozen=True)
class StateVector:
    amplitudes: np.ndarray
    dims: tuple

    def __post_init__(self):
        amp = np.asarray(self.amplitudes, dtype=complex).ravel()
        dims = tuple(int(d) for d in self.dims)
        if int(np.prod(dims)) != amp.size:
            raise DimensionMismatch(f"{amp.size} amplitudes do not fit dims {dims}")
        norm = np.linalg.norm(amp)
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"state norm {norm!r} is not 1")
        object.__setattr__(self, "amplitudes", amp)
        object.__setattr__(self, "dims", dims)

    @classmethod
    def normalized(cls, amplitudes, dims) -> "StateVector":
        amp = np.asarray(amplitudes, dtype=complex).ravel()
        return cls(amp / np.linalg.norm(amp), dims)

    def tensor(self, other: "StateVector") -> "StateVector":
        return StateVector(np.kron(self.amplitudes, other.amplitudes), self.dims + other.dims)

    @property
    def dim(self) -> int:
        return self.amplitudes.size


@dataclass(frozen=True)
class DenseOperator:
    """Square matrix with its factor dimensions and verified flags."""

    matrix: np.ndarray
    dims: tuple
    hermitian: bool = field(init=False)
    unitary: bool = field(init=False)

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        dims = tuple(int(d) for d in self.dims)
        n = int(np.prod(dims))
        if m.shape != (n, n):
            raise DimensionMismatch(f"matrix shape {m.shape} does not match dims {dims}")
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "hermitian", bool(np.allclose(m, m.conj().T, atol=_FLAG_TOL, rtol=0)))
        object.__setattr__(
            self, "unitary", bool(np.allclose(m.conj().T @ m, np.eye(n), atol=_FLAG_TOL, rtol=0))
        )

    @classmethod
    def on(cls, matrix) -> "DenseOperator":
        m = np.asarray(matrix)
        return cls(m, (m.shape[0],))


@dataclass(frozen=True)
class DensityMatrix:
    matrix: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "matrix", np.asarray(self.matrix, dtype=complex))

    def problems(self, tol: float = 1e-9) -> list:
        """Violated density-matrix invariants, empty when valid."""
        m = self.matrix
        out = []
        if not np.allclose(m, m.conj().T, atol=tol, rtol=0):
            out.append("not hermitian")
        if abs(np.trace(m) - 1.0) > tol:
            out.append(f"trace {np.trace(m).real:.12g}")
        herm = (m + m.conj().T) / 2
        if np.linalg.eigvalsh(herm).min() < -tol:
            out.append("not positive semidefinite")
        return out

    @property
    def is_valid(self) -> bool:
        return not self.problems()

    def fidelity(self, target: StateVector) -> float:
        t = target.amplitudes
        return float(np.real(t.conj() @ self.matrix @ t))


@dataclass(frozen=True)
class ControlMatrices:
    """Concrete control operators ``Z'_A, X'_A`` (on A) and ``Z'_B, X'_B`` (on B)."""

    za: np.ndarray
    xa: np.ndarray
    zb: np.ndarray
    xb: np.ndarray

    @property
    def is_unitary(self) -> bool:
        return all(DenseOperator.on(m).unitary for m in (self.za, self.xa, self.zb, self.xb))


def phi_plus() -> StateVector:
    return StateVector(np.array([1.0, 0.0, 0.0, 1.0]) / math.sqrt(2.0), (2, 2))


def rotated_target(alpha00: float) -> StateVector:
    """Target state after rotating Bob's frame by ``alpha00``.

    ``cos(alpha00/2)|Phi+> - sin(alpha00/2)(|01> - |10>)/sqrt2`` with the
    first qubit Alice's ancilla.  This is the state the swap produces when
    Bob's controls are ``Z'_B = B0`` and ``X'_B`` its in-plane orthogonal
    partner on the ideal realization.
    """
    c, s = math.cos(alpha00 / 2.0), math.sin(alpha00 / 2.0)
    amp = np.array([c, -s, s, c]) / math.sqrt(2.0)
    return StateVector(amp, (2, 2))


def plane_observable(phi: float) -> np.ndarray:
    """``cos(phi) sigma_z + sin(phi) sigma_x``."""
    return math.cos(phi) * SIGMA_Z + math.sin(phi) * SIGMA_X


def _matrix(op) -> np.ndarray:
    return op.matrix if isinstance(op, DenseOperator) else np.asarray(op)


def _amplitudes(s):
    if isinstance(s, StateVector):
        return s.amplitudes, s.dims
    amp = np.asarray(s, dtype=complex).ravel()
    d = int(round(math.sqrt(amp.size)))
    return amp, (d, d)


def expectation(s, op) -> complex:
    amp, _ = _amplitudes(s)
    m = _matrix(op)
    if m.shape != (amp.size, amp.size):
        raise DimensionMismatch(f"operator {m.shape} vs state of size {amp.size}")
    return complex(amp.conj() @ m @ amp)


def correlator(s, a, b) -> float:
    """``<s| A (x) B |s>`` for ``A`` on the first factor and ``B`` on the second."""
    amp, dims = _amplitudes(s)
    ma, mb = _matrix(a), _matrix(b)
    if len(dims) != 2 or ma.shape != (dims[0], dims[0]) or mb.shape != (dims[1], dims[1]):
        raise DimensionMismatch(f"operators {ma.shape}, {mb.shape} vs state dims {dims}")
    val = complex(amp.conj() @ np.kron(ma, mb) @ amp)
    if abs(val.imag) > 1e-10:
        raise ValueError(f"correlator has imaginary part {val.imag:.3e}; operators not hermitian?")
    return val.real


def _side_swap(z: np.ndarray, x: np.ndarray) -> np.ndarray:
    """``S = U V U`` on (system, ancilla)."""
    d = z.shape[0]
    ident = np.eye(d)
    p0, p1 = np.outer(KET0, KET0), np.outer(KET1, KET1)
    u = np.kron(ident, p0) + np.kron(x, p1)
    v = np.kron((ident + z) / 2, I2) + np.kron((ident - z) / 2, SIGMA_X)
    return u @ v @ u


def _check_controls(c: ControlMatrices):
    za, xa, zb, xb = (np.asarray(m) for m in (c.za, c.xa, c.zb, c.xb))
    if za.shape != xa.shape or zb.shape != xb.shape or za.ndim != 2 or zb.ndim != 2:
        raise DimensionMismatch("control operators on one side must share a square shape")
    if 4 * za.shape[0] * zb.shape[0] > 64:
        raise DimensionMismatch("total dimension beyond the dense simulator's range")
    return za, xa, zb, xb


def swap_isometry(c: ControlMatrices) -> DenseOperator:
    """``S_AA' (x) S_BB'`` in ``(A, B, A', B')`` order."""
    za, xa, zb, xb = _check_controls(c)
    da, db = za.shape[0], zb.shape[0]
    full = np.kron(_side_swap(za, xa), _side_swap(zb, xb))  # order (A, A', B, B')
    t = full.reshape(da, 2, db, 2, da, 2, db, 2)
    t = t.transpose(0, 2, 1, 3, 4, 6, 5, 7)
    n = da * db * 4
    return DenseOperator(t.reshape(n, n), (da, db, 2, 2))


def _first_u_is_identity(c: ControlMatrices, psi: np.ndarray) -> bool:
    za, xa, zb, xb = _check_controls(c)
    p0, p1 = np.outer(KET0, KET0), np.outer(KET1, KET1)
    ua = np.kron(np.eye(za.shape[0]), p0) + np.kron(xa, p1)
    ub = np.kron(np.eye(zb.shape[0]), p0) + np.kron(xb, p1)
    da, db = za.shape[0], zb.shape[0]
    full = np.kron(ua, ub).reshape(da, 2, db, 2, da, 2, db, 2).transpose(0, 2, 1, 3, 4, 6, 5, 7)
    n = da * db * 4
    vec = np.kron(psi, np.kron(KET0, KET0))
    return bool(np.allclose(full.reshape(n, n) @ vec, vec, atol=1e-12))


def rho_swap(s: StateVector, c: ControlMatrices) -> DensityMatrix:
    """Reduced ancilla state after the swap, ancillas prepared in ``|00>``."""
    amp, dims = _amplitudes(s)
    za, _, zb, _ = _check_controls(c)
    if dims != (za.shape[0], zb.shape[0]):
        raise DimensionMismatch(f"state dims {dims} vs controls {za.shape[0]}x{zb.shape[0]}")
    assert _first_u_is_identity(c, amp), "first controlled-X must act trivially on |0> ancillas"
    out = swap_isometry(c).matrix @ np.kron(amp, np.kron(KET0, KET0))
    m = out.reshape(dims[0] * dims[1], 4)
    return DensityMatrix(m.T @ m.conj())


def rho_swap_fidelity(s: StateVector, c: ControlMatrices, target: StateVector | None = None):
    """``(rho_swap, <target|rho_swap|target>)``; target defaults to ``|Phi+>``."""
    target = phi_plus() if target is None else target
    if target.dims != (2, 2):
        raise DimensionMismatch("target must be a two-qubit state")
    rho = rho_swap(s, c)
    if c.is_unitary:
        issues = rho.problems()
        if issues:
            raise ValueError(f"rho_swap invalid for unitary controls: {issues}")
    return rho, rho.fidelity(target)
