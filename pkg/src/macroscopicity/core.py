"""Dense state/operator containers and the linear algebra built on them.

Qubit 1 is the most significant bit of an amplitude index, so the
computational basis state ``|q1 q2 ... qN>`` sits at index
``q1*2**(N-1) + ... + qN``.  Public functions take 1-based qubit labels;
helpers prefixed with an underscore work 0-based.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Sequence

import numpy as np

from .config import TOL, check_capacity

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = {"i": I2, "x": SX, "y": SY, "z": SZ}


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=complex, copy=True)
    arr.setflags(write=False)
    return arr


def _num_qubits_for(dim: int) -> int:
    n = int(dim).bit_length() - 1
    if dim < 2 or (1 << n) != dim:
        raise ValueError(f"dimension {dim} is not a power of two >= 2")
    return n


@dataclass(frozen=True, eq=False)
class StateVector:
    amplitudes: np.ndarray
    num_qubits: int

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if self.num_qubits < 1 or amps.size != 2 ** self.num_qubits:
            raise ValueError(
                f"expected {2 ** self.num_qubits} amplitudes for "
                f"{self.num_qubits} qubits, got {amps.size}"
            )
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > TOL.construction:
            raise ValueError(f"state is not normalized (norm {norm!r})")
        object.__setattr__(self, "amplitudes", _frozen(amps))

    @classmethod
    def from_amplitudes(cls, amplitudes, normalize: bool = False) -> "StateVector":
        amps = np.asarray(amplitudes, dtype=complex).reshape(-1)
        if normalize:
            amps = amps / np.linalg.norm(amps)
        return cls(amps, _num_qubits_for(amps.size))

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def density(self) -> "DensityOperator":
        psi = self.amplitudes
        return DensityOperator(np.outer(psi, psi.conj()), self.num_qubits)


def _is_psd(m: np.ndarray, tol: float) -> bool:
    if m.shape[0] <= 256:
        return np.linalg.eigvalsh(m)[0] >= -tol
    # Cholesky of the shifted matrix is much cheaper than a full spectrum
    try:
        np.linalg.cholesky(m + tol * np.eye(m.shape[0]))
    except np.linalg.LinAlgError:
        return False
    return True


@dataclass(frozen=True, eq=False)
class DensityOperator:
    matrix: np.ndarray
    num_qubits: int

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        d = 2 ** self.num_qubits
        if m.shape != (d, d):
            raise ValueError(f"expected a {d}x{d} matrix, got {m.shape}")
        tol = TOL.construction
        if np.max(np.abs(m - m.conj().T), initial=0.0) > tol:
            raise ValueError("density operator is not Hermitian")
        tr = np.trace(m).real
        if abs(tr - 1.0) > tol:
            raise ValueError(f"density operator has trace {tr!r}")
        m = 0.5 * (m + m.conj().T)
        if not _is_psd(m, tol):
            raise ValueError("density operator has a negative eigenvalue")
        object.__setattr__(self, "matrix", _frozen(m))

    @classmethod
    def from_matrix(cls, matrix) -> "DensityOperator":
        m = np.asarray(matrix, dtype=complex)
        return cls(m, _num_qubits_for(m.shape[0]))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True, eq=False)
class HermitianOperator:
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"operator must be square, got shape {m.shape}")
        if np.max(np.abs(m - m.conj().T), initial=0.0) > TOL.construction:
            raise ValueError("operator is not Hermitian")
        object.__setattr__(self, "matrix", _frozen(0.5 * (m + m.conj().T)))

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def as_matrix(op) -> np.ndarray:
    if isinstance(op, (HermitianOperator, DensityOperator)):
        return op.matrix
    if hasattr(op, "to_matrix"):
        return op.to_matrix()
    return np.asarray(op, dtype=complex)


def as_density(state) -> DensityOperator:
    if isinstance(state, DensityOperator):
        return state
    if isinstance(state, StateVector):
        return state.density()
    raise TypeError(f"expected a state, got {type(state).__name__}")


# ---------------------------------------------------------------------------
# products and local application


def tensor(a, b):
    """Kronecker product; ``a`` occupies the most significant qubits."""
    if isinstance(a, StateVector) and isinstance(b, StateVector):
        check_capacity(a.num_qubits + b.num_qubits)
        return StateVector(np.kron(a.amplitudes, b.amplitudes),
                           a.num_qubits + b.num_qubits)
    if isinstance(a, DensityOperator) and isinstance(b, DensityOperator):
        check_capacity(a.num_qubits + b.num_qubits)
        return DensityOperator(np.kron(a.matrix, b.matrix),
                               a.num_qubits + b.num_qubits)
    ma, mb = as_matrix(a), as_matrix(b)
    for m in (ma, mb):
        _num_qubits_for(m.shape[0])
    check_capacity(_num_qubits_for(ma.shape[0]) + _num_qubits_for(mb.shape[0]))
    out = np.kron(ma, mb)
    if isinstance(a, HermitianOperator) and isinstance(b, HermitianOperator):
        return HermitianOperator(out)
    return out


def kron_all(factors: Iterable[np.ndarray]) -> np.ndarray:
    return reduce(np.kron, list(factors))


def pauli_string(label: str) -> np.ndarray:
    """Matrix of a Pauli string such as ``"zxz"`` (first letter = first qubit)."""
    return kron_all(PAULIS[c] for c in label.lower())


def apply_local(op: np.ndarray, vecs: np.ndarray, qubits: Sequence[int],
                num_qubits: int) -> np.ndarray:
    """Apply a ``2^k x 2^k`` operator on 0-based ``qubits`` to vector(s).

    ``vecs`` has shape ``(2^N,)`` or ``(2^N, m)``; the result has the same shape.
    """
    qubits = list(qubits)
    k = len(qubits)
    batch = vecs.ndim == 2
    m = vecs.shape[1] if batch else 1
    t = vecs.reshape((2,) * num_qubits + (m,))
    opt = np.asarray(op).reshape((2,) * (2 * k))
    out = np.tensordot(opt, t, axes=(list(range(k, 2 * k)), qubits))
    out = np.moveaxis(out, list(range(k)), qubits)
    out = out.reshape(2 ** num_qubits, m)
    return out if batch else out[:, 0]


def group_matrix(vec: np.ndarray, qubits: Sequence[int], num_qubits: int) -> np.ndarray:
    """Reshape a state into a ``(2^k, 2^(N-k))`` matrix with 0-based ``qubits`` as rows."""
    qubits = list(qubits)
    rest = [q for q in range(num_qubits) if q not in qubits]
    t = np.asarray(vec).reshape((2,) * num_qubits)
    t = np.transpose(t, qubits + rest)
    return t.reshape(2 ** len(qubits), -1)


# ---------------------------------------------------------------------------
# partial trace, spectra, norms


def _zero_based(keep: Iterable[int], num_qubits: int) -> list[int]:
    keep = sorted(set(int(q) for q in keep))
    if not keep:
        raise ValueError("keep set must be non-empty")
    if keep[0] < 1 or keep[-1] > num_qubits:
        raise ValueError(f"qubit labels must lie in 1..{num_qubits}, got {keep}")
    return [q - 1 for q in keep]


def partial_trace(rho, keep: Iterable[int]) -> DensityOperator:
    """Reduced state on the 1-based qubits in ``keep`` (kept in ascending order)."""
    if isinstance(rho, StateVector):
        keep0 = _zero_based(keep, rho.num_qubits)
        m = group_matrix(rho.amplitudes, keep0, rho.num_qubits)
        return DensityOperator(m @ m.conj().T, len(keep0))
    rho = as_density(rho)
    n = rho.num_qubits
    keep0 = _zero_based(keep, n)
    traced = [q for q in range(n) if q not in keep0]
    t = rho.matrix.reshape((2,) * (2 * n))
    # bring kept row axes, kept column axes, then traced pairs to the end
    perm = keep0 + [n + q for q in keep0] + traced + [n + q for q in traced]
    t = np.transpose(t, perm)
    dk, dt = 2 ** len(keep0), 2 ** len(traced)
    t = t.reshape(dk, dk, dt, dt)
    return DensityOperator(np.einsum("abjj->ab", t), len(keep0))


def eigh(M) -> SpectralDecomposition:
    """Spectral decomposition with eigenvalues in descending order."""
    m = as_matrix(M)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("eigh needs a square matrix")
    if np.max(np.abs(m - m.conj().T), initial=0.0) > TOL.decomposition:
        raise ValueError("eigh needs a Hermitian matrix")
    w, v = np.linalg.eigh(0.5 * (m + m.conj().T))
    return SpectralDecomposition(w[::-1].copy(), v[:, ::-1].copy())


def trace_norm(M) -> float:
    m = as_matrix(M)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("trace norm needs a square matrix")
    if np.allclose(m, m.conj().T, atol=1e-14):
        return float(np.sum(np.abs(np.linalg.eigvalsh(0.5 * (m + m.conj().T)))))
    return float(np.sum(np.linalg.svd(m, compute_uv=False)))


def trace_distance(rho0, rho1) -> float:
    a, b = as_density(rho0), as_density(rho1)
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {b.dim}")
    return 0.5 * trace_norm(a.matrix - b.matrix)


def overlap(psi: StateVector, phi: StateVector) -> complex:
    if psi.dim != phi.dim:
        raise ValueError(f"dimension mismatch: {psi.dim} vs {phi.dim}")
    return complex(np.vdot(psi.amplitudes, phi.amplitudes))


def _orth_range(m: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Orthonormal basis for the column span of ``m``."""
    if m.shape[1] == 0:
        return m
    u, s, _ = np.linalg.svd(m, full_matrices=False)
    if s.size == 0 or s[0] == 0:
        return u[:, :0]
    return u[:, s > tol * max(1.0, s[0])]


def reduced_trace_distance(psi0: StateVector, psi1: StateVector,
                           keep: Iterable[int]) -> float:
    """Trace distance of the reductions of two pure states to ``keep``.

    Works in the joint support of the two reductions, so a large kept block
    costs only as much as its Schmidt ranks.
    """
    n = psi0.num_qubits
    if psi1.num_qubits != n:
        raise ValueError("states have different qubit counts")
    keep0 = _zero_based(keep, n)
    m0 = group_matrix(psi0.amplitudes, keep0, n)
    m1 = group_matrix(psi1.amplitudes, keep0, n)
    if m0.shape[0] <= 64:
        diff = m0 @ m0.conj().T - m1 @ m1.conj().T
        return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(diff))))
    basis = _orth_range(np.hstack([_orth_range(m0), _orth_range(m1)]))
    b0, b1 = basis.conj().T @ m0, basis.conj().T @ m1
    diff = b0 @ b0.conj().T - b1 @ b1.conj().T
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(0.5 * (diff + diff.conj().T)))))


def sqrt_psd(m: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(0.5 * (m + m.conj().T))
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ v.conj().T


def _psd_factor(m: np.ndarray) -> np.ndarray:
    """``B`` with ``B B^dagger = m``, one column per positive eigenvalue."""
    w, v = np.linalg.eigh(0.5 * (m + m.conj().T))
    keep = w > 0
    return v[:, keep] * np.sqrt(w[keep])


def root_fidelity(rho0, rho1) -> float:
    """``Tr |sqrt(rho0) sqrt(rho1)|``, the nuclear norm of ``B0^dagger B1``.

    Working with factors avoids the square root of a product with
    near-zero eigenvalues, which loses half the digits for rank-deficient
    states.
    """
    if isinstance(rho0, StateVector) and isinstance(rho1, StateVector):
        return abs(overlap(rho0, rho1))
    b0 = (rho0.amplitudes[:, None] if isinstance(rho0, StateVector)
          else _psd_factor(as_density(rho0).matrix))
    b1 = (rho1.amplitudes[:, None] if isinstance(rho1, StateVector)
          else _psd_factor(as_density(rho1).matrix))
    return float(np.sum(np.linalg.svd(b0.conj().T @ b1, compute_uv=False)))


def fidelity(rho0, rho1) -> float:
    """Uhlmann fidelity ``(Tr sqrt(sqrt(rho0) rho1 sqrt(rho0)))^2``."""
    return root_fidelity(rho0, rho1) ** 2


def bures_distance(rho0, rho1) -> float:
    f = min(1.0, root_fidelity(rho0, rho1))
    return float(np.sqrt(max(0.0, 2.0 * (1.0 - f))))


def expectation(state, op: np.ndarray) -> float:
    op = as_matrix(op)
    if isinstance(state, StateVector):
        psi = state.amplitudes
        return float(np.vdot(psi, op @ psi).real)
    return float(np.trace(as_density(state).matrix @ op).real)


# ---------------------------------------------------------------------------
# serialization


def state_to_json(state) -> dict:
    if isinstance(state, StateVector):
        return {"n": state.num_qubits,
                "amplitudes": [[float(a.real), float(a.imag)] for a in state.amplitudes]}
    rho = as_density(state)
    return {"n": rho.num_qubits, "kind": "density",
            "matrix": [[[float(a.real), float(a.imag)] for a in row] for row in rho.matrix]}


def state_from_json(data) -> StateVector | DensityOperator:
    if isinstance(data, str):
        data = json.loads(data)
    n = int(data["n"])
    if "amplitudes" in data:
        amps = np.array([complex(re, im) for re, im in data["amplitudes"]])
        return StateVector(amps, n)
    mat = np.array([[complex(re, im) for re, im in row] for row in data["matrix"]])
    return DensityOperator(mat, n)
