"""Constructors for the named multi-qubit states.

All pure constructors fix the global phase so that the first nonzero
amplitude is real and positive.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .config import TOL, check_capacity
from .core import DensityOperator, StateVector

FAMILIES = (
    "ghz", "gen_ghz", "logical_ghz", "w", "dicke", "cluster", "cluster_ghz",
    "domain_wall", "ps_domain_wall", "product_plus", "singlet_pairs",
    "quantum_classical", "cloned", "ghz_mixture",
)


def _canonical(amps: np.ndarray) -> np.ndarray:
    amps = np.asarray(amps, dtype=complex)
    nz = np.flatnonzero(np.abs(amps) > TOL.construction)
    if nz.size:
        a = amps[nz[0]]
        amps = amps * (abs(a) / a)
    return amps / np.linalg.norm(amps)


def _state(amps) -> StateVector:
    return StateVector.from_amplitudes(_canonical(amps))


def _bits(num_qubits: int) -> np.ndarray:
    """``bits[x, k]`` is the value of 0-based qubit ``k`` in basis index ``x``."""
    idx = np.arange(2 ** num_qubits)
    shifts = num_qubits - 1 - np.arange(num_qubits)
    return (idx[:, None] >> shifts[None, :]) & 1


def _check_n(num_qubits: int, minimum: int = 1) -> None:
    if int(num_qubits) != num_qubits or num_qubits < minimum:
        raise ValueError(f"need an integer number of qubits >= {minimum}, got {num_qubits}")
    check_capacity(num_qubits)


def basis_state(bits: str | list[int]) -> StateVector:
    bits = [int(b) for b in bits]
    _check_n(len(bits))
    amps = np.zeros(2 ** len(bits), dtype=complex)
    amps[int("".join(map(str, bits)), 2)] = 1.0
    return StateVector(amps, len(bits))


def product_state(single_qubit_states) -> StateVector:
    factors = [np.asarray(v, dtype=complex) for v in single_qubit_states]
    _check_n(len(factors))
    amps = factors[0]
    for f in factors[1:]:
        amps = np.kron(amps, f)
    return _state(amps)


def ghz(num_qubits: int) -> StateVector:
    _check_n(num_qubits)
    amps = np.zeros(2 ** num_qubits, dtype=complex)
    amps[0] = amps[-1] = 1.0
    return _state(amps)


def epsilon_qubit(epsilon: float) -> np.ndarray:
    return np.array([math.cos(epsilon), math.sin(epsilon)], dtype=complex)


def generalized_ghz_branches(num_qubits: int, epsilon: float):
    if not (-1e-12 <= epsilon <= math.pi / 2 + 1e-12):
        raise ValueError(f"epsilon must lie in [0, pi/2], got {epsilon}")
    _check_n(num_qubits)
    zero = basis_state([0] * num_qubits)
    eps = product_state([epsilon_qubit(epsilon)] * num_qubits)
    return zero, eps


def generalized_ghz(num_qubits: int, epsilon: float) -> StateVector:
    zero, eps = generalized_ghz_branches(num_qubits, epsilon)
    amps = zero.amplitudes + eps.amplitudes
    norm = math.sqrt(2.0 * (1.0 + math.cos(epsilon) ** num_qubits))
    return _state(amps / norm)


def cluster_1d(num_qubits: int, sign: int = +1) -> StateVector:
    """Ring cluster state: controlled-phase on every neighbouring pair of ``|+-...>``."""
    _check_n(num_qubits, minimum=3)
    if sign not in (+1, -1):
        raise ValueError("sign must be +1 or -1")
    bits = _bits(num_qubits)
    amps = np.ones(2 ** num_qubits, dtype=complex)
    if sign < 0:
        amps = amps * (-1.0) ** bits.sum(axis=1)
    pairs = bits * np.roll(bits, -1, axis=1)
    amps = amps * (-1.0) ** pairs.sum(axis=1)
    return _state(amps)


def cluster_ghz(num_qubits: int) -> StateVector:
    if num_qubits % 3 or num_qubits < 6:
        raise ValueError("cluster-GHZ needs N divisible by 3 and N >= 6")
    plus, minus = cluster_1d(num_qubits, +1), cluster_1d(num_qubits, -1)
    ov = np.vdot(plus.amplitudes, minus.amplitudes).real
    amps = (plus.amplitudes + minus.amplitudes) / math.sqrt(2.0 * (1.0 + ov))
    return _state(amps)


def domain_wall(num_qubits: int) -> StateVector:
    _check_n(num_qubits)
    amps = np.zeros(2 ** num_qubits, dtype=complex)
    for k in range(num_qubits + 1):
        # k leading ones followed by N-k zeros
        amps[((1 << k) - 1) << (num_qubits - k)] = 1.0
    return _state(amps)


def dicke(num_qubits: int, excitations: int) -> StateVector:
    _check_n(num_qubits)
    if not 0 <= excitations <= num_qubits:
        raise ValueError(f"excitations must lie in 0..{num_qubits}")
    weights = _bits(num_qubits).sum(axis=1)
    amps = (weights == excitations).astype(complex)
    return _state(amps)


def w_state(num_qubits: int) -> StateVector:
    return dicke(num_qubits, 1)


def cloned_superposition(num_qubits: int):
    """``(psi, psi0, psi1)`` built from the two central Dicke states (odd N)."""
    if num_qubits % 2 == 0:
        raise ValueError("cloned superposition needs odd N")
    lo = dicke(num_qubits, (num_qubits - 1) // 2).amplitudes
    hi = dicke(num_qubits, (num_qubits + 1) // 2).amplitudes
    psi0 = StateVector((lo + hi) / math.sqrt(2), num_qubits)
    psi1 = StateVector((lo - hi) / math.sqrt(2), num_qubits)
    psi = StateVector((psi0.amplitudes + psi1.amplitudes) / math.sqrt(2), num_qubits)
    return psi, psi0, psi1


def logical_ghz_branches(num_blocks: int, zero_logical: StateVector,
                         one_logical: StateVector):
    if zero_logical.num_qubits != one_logical.num_qubits:
        raise ValueError("logical states must have the same block size")
    if abs(np.vdot(zero_logical.amplitudes, one_logical.amplitudes)) > TOL.construction:
        raise ValueError("logical states must be orthogonal")
    m = zero_logical.num_qubits
    _check_n(m * num_blocks)
    a, b = zero_logical.amplitudes, one_logical.amplitudes
    za, ob = a, b
    for _ in range(num_blocks - 1):
        za, ob = np.kron(za, a), np.kron(ob, b)
    n = m * num_blocks
    return StateVector(za, n), StateVector(ob, n)


def logical_ghz(num_blocks: int, zero_logical: StateVector,
                one_logical: StateVector) -> StateVector:
    z, o = logical_ghz_branches(num_blocks, zero_logical, one_logical)
    return _state((z.amplitudes + o.amplitudes) / math.sqrt(2))


BELL_LOGICAL = (
    StateVector(np.array([1, 0, 0, 1]) / math.sqrt(2), 2),
    StateVector(np.array([1, 0, 0, -1]) / math.sqrt(2), 2),
)

# block basis relabelling used by the quantum/classical pair
_ALPHA = (0b00, 0b11)
_BETA = (0b10, 0b01)


def ghz_coefficients(num_blocks: int) -> np.ndarray:
    c = np.zeros(2 ** num_blocks, dtype=complex)
    c[0] = c[-1] = 1 / math.sqrt(2)
    return c


def quantum_classical(num_qubits: int, c_coeffs=None, d_coeffs=None):
    """``(psi, psi0, psi1)`` with ``psi0`` in the {|00>,|11>} block basis and
    ``psi1`` in the {|10>,|01>} block basis.  Coefficients default to GHZ-type."""
    if num_qubits % 2:
        raise ValueError("quantum/classical pair needs even N")
    _check_n(num_qubits)
    blocks = num_qubits // 2
    c = ghz_coefficients(blocks) if c_coeffs is None else np.asarray(c_coeffs, dtype=complex)
    d = ghz_coefficients(blocks) if d_coeffs is None else np.asarray(d_coeffs, dtype=complex)
    for name, coeffs in (("c", c), ("d", d)):
        if coeffs.shape != (2 ** blocks,):
            raise ValueError(f"{name} coefficients need length {2 ** blocks}")
        if abs(np.linalg.norm(coeffs) - 1) > TOL.construction:
            raise ValueError(f"{name} coefficients are not normalized")
    psi0 = np.zeros(2 ** num_qubits, dtype=complex)
    psi1 = np.zeros(2 ** num_qubits, dtype=complex)
    block_bits = _bits(blocks)
    for label in range(2 ** blocks):
        i0 = i1 = 0
        for b in block_bits[label]:
            i0 = (i0 << 2) | _ALPHA[b]
            i1 = (i1 << 2) | _BETA[b]
        psi0[i0] += c[label]
        psi1[i1] += d[label]
    s0, s1 = StateVector(psi0, num_qubits), StateVector(psi1, num_qubits)
    return StateVector((psi0 + psi1) / math.sqrt(2), num_qubits), s0, s1


def singlet_pairs(num_qubits: int) -> StateVector:
    if num_qubits % 2:
        raise ValueError("singlet pairs need even N")
    _check_n(num_qubits)
    singlet = np.array([0, 1, -1, 0], dtype=complex) / math.sqrt(2)
    amps = singlet
    for _ in range(num_qubits // 2 - 1):
        amps = np.kron(amps, singlet)
    return _state(amps)


def product_plus(num_qubits: int) -> StateVector:
    _check_n(num_qubits)
    return _state(np.ones(2 ** num_qubits))


def incoherent_ghz_mixture(num_qubits: int) -> DensityOperator:
    _check_n(num_qubits)
    d = 2 ** num_qubits
    m = np.zeros((d, d), dtype=complex)
    m[0, 0] = m[-1, -1] = 0.5
    return DensityOperator(m, num_qubits)


# ---------------------------------------------------------------------------
# string specs


@dataclass(frozen=True)
class StateSpec:
    """A family name, an optional qubit count and family parameters.

    String form: ``family[:N][:key=value]...``, e.g. ``ghz:8``,
    ``gen_ghz:8:eps=0.5236``, ``dicke:9:x=4`` or the N-less template
    ``gen_ghz:eps=0.3`` used by scans.
    """

    family: str
    num_qubits: int | None = None
    params: dict = field(default_factory=dict)

    @classmethod
    def parse(cls, text: str) -> "StateSpec":
        parts = [p for p in text.strip().split(":")]
        family = parts[0].strip().lower()
        if family not in FAMILIES:
            raise ValueError(f"unknown state family {family!r}; known: {', '.join(FAMILIES)}")
        n = None
        params = {}
        for part in parts[1:]:
            part = part.strip()
            if not part:
                continue
            if "=" in part:
                key, value = part.split("=", 1)
                params[key.strip()] = _parse_value(value.strip())
            elif n is None:
                n = int(part)
            else:
                raise ValueError(f"unexpected field {part!r} in state spec {text!r}")
        return cls(family, n, params)

    def with_n(self, num_qubits: int) -> "StateSpec":
        return StateSpec(self.family, num_qubits, dict(self.params))

    def __str__(self) -> str:
        fields = [self.family]
        if self.num_qubits is not None:
            fields.append(str(self.num_qubits))
        fields += [f"{k}={v}" for k, v in sorted(self.params.items())]
        return ":".join(fields)


def _parse_value(text: str):
    for conv in (int, float):
        try:
            return conv(text)
        except ValueError:
            pass
    return text
