"""Unitary evolution, channels, survival bound, classical Fisher information
and the Bures-metric consistency check (hbar = 1 throughout)."""
from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import expm

from .config import TOL
from .core import (I2, SZ, DensityOperator, StateVector, apply_local, as_density,
                   as_matrix, bures_distance, trace_norm)
from .observables import LocalOperator


# ---------------------------------------------------------------------------
# channels


@dataclass(frozen=True, eq=False)
class QuantumChannel:
    """Kraus representation on ``num_qubits`` qubits.

    Parameters
    ----------
    kraus_operators : sequence of ndarray
        Square matrices with ``sum K^dag K = 1`` within 1e-8.
    """

    kraus_operators: tuple

    def __post_init__(self):
        ops = tuple(np.array(k, dtype=complex) for k in self.kraus_operators)
        if not ops:
            raise ValueError("need at least one Kraus operator")
        d = ops[0].shape[0]
        if any(k.shape != (d, d) for k in ops):
            raise ValueError("Kraus operators must share one square shape")
        total = sum(k.conj().T @ k for k in ops)
        if np.max(np.abs(total - np.eye(d))) > TOL.decomposition:
            raise ValueError("Kraus operators do not sum to the identity (not trace preserving)")
        for k in ops:
            k.setflags(write=False)
        object.__setattr__(self, "kraus_operators", ops)

    @property
    def num_qubits(self) -> int:
        return self.kraus_operators[0].shape[0].bit_length() - 1

    def apply(self, state, qubits: Sequence[int] | None = None, num_qubits: int | None = None):
        """Apply to a state, optionally on the 1-based ``qubits`` of a larger register."""
        rho = as_density(state)
        n = rho.num_qubits
        m = rho.matrix
        targets = list(range(n)) if qubits is None else [q - 1 for q in qubits]
        if len(targets) != self.num_qubits:
            raise ValueError("channel size does not match the target qubits")
        out = np.zeros_like(m)
        for k in self.kraus_operators:
            left = apply_local(k, m, targets, n)
            out += apply_local(k, left.conj().T, targets, n).conj().T
        return DensityOperator(0.5 * (out + out.conj().T), n)


@dataclass(frozen=True, eq=False)
class LocalChannel:
    """Product of small channels acting on disjoint qubit sets."""

    factors: tuple  # of (QuantumChannel, tuple of 1-based qubits)
    num_qubits: int

    def apply(self, state):
        rho = as_density(state)
        for ch, qubits in self.factors:
            rho = ch.apply(rho, qubits)
        return rho

    @property
    def kraus_operators(self) -> tuple:
        """Full Kraus set (exponentially many; for small registers only)."""
        from .observables import embed
        ops = [np.eye(2 ** self.num_qubits, dtype=complex)]
        for ch, qubits in self.factors:
            ops = [embed(k, qubits, self.num_qubits) @ o for o in ops for k in ch.kraus_operators]
        return tuple(ops)


def identity_channel(num_qubits: int) -> QuantumChannel:
    return QuantumChannel((np.eye(2 ** num_qubits),))


def phase_flip(p: float) -> QuantumChannel:
    if not 0 <= p <= 1:
        raise ValueError("flip probability must lie in [0, 1]")
    return QuantumChannel((math.sqrt(1 - p) * I2, math.sqrt(p) * SZ))


def flip_probability(gamma: float, t: float) -> float:
    """Phase-flip probability with single-qubit coherence factor ``exp(-gamma t)``."""
    if gamma < 0 or t < 0:
        raise ValueError("gamma and t must be non-negative")
    return 0.5 * (1.0 - math.exp(-gamma * t))


def dephasing_channel(num_qubits: int, gamma: float, t: float) -> LocalChannel:
    """Independent phase flips on every qubit, coherences shrink by ``exp(-gamma t)``."""
    ch = phase_flip(flip_probability(gamma, t))
    return LocalChannel(tuple((ch, (q,)) for q in range(1, num_qubits + 1)), num_qubits)


def apply_channel(channel, state) -> DensityOperator:
    return channel.apply(state)


def is_cptp(channel) -> bool:
    if isinstance(channel, LocalChannel):
        return True  # factors are validated on construction
    return isinstance(channel, QuantumChannel)


def coherence_decay(epsilon: float, gamma: float, t: float, num_qubits: int) -> float:
    """Trace norm of the dephased cross term ``E(|0><eps|)^{x N}``.

    The channel acts qubit-wise and trace norms multiply over tensor
    factors, so the single-qubit value is computed and raised to ``N``.
    """
    ch = phase_flip(flip_probability(gamma, t))
    cross = np.outer([1, 0], [math.cos(epsilon), math.sin(epsilon)]).astype(complex)
    out = sum(k @ cross @ k.conj().T for k in ch.kraus_operators)
    return float(trace_norm(out) ** num_qubits)


def coherence_decay_dense(epsilon: float, gamma: float, t: float, num_qubits: int) -> float:
    """Same quantity from the full ``2^N x 2^N`` cross term (small N)."""
    zero = np.zeros(2 ** num_qubits, dtype=complex)
    zero[0] = 1
    eps = np.array([1.0 + 0j])
    for _ in range(num_qubits):
        eps = np.kron(eps, [math.cos(epsilon), math.sin(epsilon)])
    m = np.outer(zero, eps.conj())
    ch = dephasing_channel(num_qubits, gamma, t)
    for single, qubits in ch.factors:
        q = [x - 1 for x in qubits]
        out = np.zeros_like(m)
        for k in single.kraus_operators:
            left = apply_local(k, m, q, num_qubits)
            out += apply_local(k, left.conj().T, q, num_qubits).conj().T
        m = out
    return trace_norm(m)


def fit_decay_rate(ts, values) -> float:
    """Least-squares slope of ``-log(value)`` against ``t``."""
    ts = np.asarray(ts, dtype=float)
    y = -np.log(np.asarray(values, dtype=float))
    slope, _ = np.polyfit(ts, y, 1)
    return float(slope)


# ---------------------------------------------------------------------------
# POVMs


@dataclass(frozen=True, eq=False)
class Povm:
    effects: tuple

    def __post_init__(self):
        effects = tuple(np.array(e, dtype=complex) for e in self.effects)
        d = effects[0].shape[0]
        for e in effects:
            if np.max(np.abs(e - e.conj().T)) > TOL.construction:
                raise ValueError("POVM effect is not Hermitian")
            if np.linalg.eigvalsh(e)[0] < -TOL.construction:
                raise ValueError("POVM effect is not positive semidefinite")
        if np.max(np.abs(sum(effects) - np.eye(d))) > TOL.decomposition:
            raise ValueError("POVM effects do not sum to the identity")
        object.__setattr__(self, "effects", effects)

    def probabilities(self, state) -> np.ndarray:
        if isinstance(state, StateVector):
            v = state.amplitudes
            return np.array([np.vdot(v, e @ v).real for e in self.effects])
        rho = as_density(state).matrix
        return np.array([np.trace(e @ rho).real for e in self.effects])


def projective_povm(observable) -> Povm:
    """Spectral projectors of an observable (degenerate eigenvalues merged)."""
    m = as_matrix(observable)
    w, v = np.linalg.eigh(m)
    effects, start = [], 0
    while start < len(w):
        stop = start + 1
        while stop < len(w) and abs(w[stop] - w[start]) < 1e-9:
            stop += 1
        block = v[:, start:stop]
        effects.append(block @ block.conj().T)
        start = stop
    return Povm(tuple(effects))


# ---------------------------------------------------------------------------
# evolution


def unitary(H, t: float) -> np.ndarray:
    m = as_matrix(H)
    w, v = np.linalg.eigh(m)
    return (v * np.exp(-1j * w * t)) @ v.conj().T


def evolve(state, H, t: float):
    """``exp(-i H t)`` applied to a pure or mixed state.

    A :class:`LocalOperator` is exponentiated group by group, since its terms
    act on disjoint qubits and commute.
    """
    if isinstance(H, LocalOperator):
        factors = [(expm(-1j * term * t), [q - 1 for q in g])
                   for g, term in zip(H.grouping.groups, H.terms)]

        def act(x):
            for u, qubits in factors:
                x = apply_local(u, x, qubits, H.num_qubits)
            return x
    else:
        u = unitary(H, t)

        def act(x):
            return u @ x
    if isinstance(state, StateVector):
        return StateVector(act(state.amplitudes), state.num_qubits)
    rho = as_density(state)
    left = act(rho.matrix)
    out = act(left.conj().T).conj().T
    return DensityOperator(0.5 * (out + out.conj().T), rho.num_qubits)


def range_projector(rho, cutoff: float = TOL.rank_cutoff) -> np.ndarray:
    if isinstance(rho, StateVector):
        return np.outer(rho.amplitudes, rho.amplitudes.conj())
    w, v = np.linalg.eigh(as_density(rho).matrix)
    keep = v[:, w > cutoff]
    return keep @ keep.conj().T


def survival_probability(rho0, H, t: float) -> float:
    """``Tr(Pi rho(t))`` with ``Pi`` the projector onto the range of ``rho0``."""
    if isinstance(rho0, StateVector):
        return float(abs(np.vdot(rho0.amplitudes, evolve(rho0, H, t).amplitudes)) ** 2)
    proj = range_projector(rho0)
    return float(np.trace(proj @ evolve(rho0, H, t).matrix).real)


@dataclass(frozen=True)
class FlemingReport:
    passed: bool
    checked: int
    skipped: int
    worst_margin: float
    rows: tuple = field(default=())


def fleming_report(rho0, H, t_grid, slack: float = 1e-9) -> FlemingReport:
    """Check ``<Pi>(t) >= cos^2(sqrt(F) t / 2)`` on the grid points inside
    ``sqrt(F) |t| <= pi``; points outside that window are skipped."""
    from .fisher import qfi_any
    f = qfi_any(rho0, H)
    root = math.sqrt(max(f, 0.0))
    rows, skipped, worst = [], 0, math.inf
    for t in t_grid:
        if root * abs(t) > math.pi:
            skipped += 1
            continue
        s = survival_probability(rho0, H, t)
        b = math.cos(root * t / 2) ** 2
        rows.append((float(t), s, b))
        worst = min(worst, s - b)
    return FlemingReport(all(s >= b - slack for _, s, b in rows), len(rows), skipped,
                         worst, tuple(rows))


def fleming_bound_check(rho0, H, t_grid) -> bool:
    return fleming_report(rho0, H, t_grid).passed


# ---------------------------------------------------------------------------
# classical Fisher information and the Bures line element


@dataclass(frozen=True)
class ClassicalFisher:
    value: float
    retained_mass: float


def classical_fisher_report(rho_family: Callable, povm: Povm, omega: float,
                            d_omega: float = 1e-5, floor: float = 1e-12) -> ClassicalFisher:
    p = povm.probabilities(rho_family(omega))
    plus = povm.probabilities(rho_family(omega + d_omega))
    minus = povm.probabilities(rho_family(omega - d_omega))
    dp = (plus - minus) / (2 * d_omega)
    keep = p > floor
    mass = float(np.sum(p[keep]))
    if mass < 0.999:
        warnings.warn(f"classical Fisher information dropped {1 - mass:.3g} of the probability mass")
    return ClassicalFisher(float(np.sum(dp[keep] ** 2 / p[keep])), mass)


def classical_fisher(rho_family: Callable, povm: Povm, omega: float,
                     d_omega: float = 1e-5) -> float:
    """``sum_i (dp_i/domega)^2 / p_i`` by central differences.

    Parameters
    ----------
    rho_family : callable
        ``omega -> state``.
    povm : Povm
    omega : float
    d_omega : float
        Finite-difference step.
    """
    return classical_fisher_report(rho_family, povm, omega, d_omega).value


def encoded_family(state, H) -> Callable:
    """``omega -> exp(-i omega H) state``."""
    return lambda omega: evolve(state, H, omega)


@dataclass(frozen=True)
class BuresCheck:
    passed: bool
    finite_difference: float
    predicted: float


def bures_report(rho, H, dt: float = 1e-4, rtol: float = 1e-3) -> BuresCheck:
    from .fisher import qfi_any
    d = bures_distance(rho, evolve(rho, H, dt)) / dt
    pred = 0.5 * math.sqrt(max(qfi_any(rho, H), 0.0))
    if pred < 1e-9:
        ok = d < 1e-6
    else:
        ok = abs(d - pred) <= rtol * pred
    return BuresCheck(ok, d, pred)


def bures_consistency_check(rho, H, dt: float = 1e-4) -> bool:
    """Bures speed ``d_B(rho, rho(dt)) / dt`` against ``sqrt(F) / 2``."""
    return bures_report(rho, H, dt).passed


# ---------------------------------------------------------------------------
# sweeps


def decay_sweep(epsilon: float, gamma: float, ts, num_qubits: int):
    """Rows ``(t, trace norm, exp(-gamma eps^2 N t))``."""
    return [(float(t), coherence_decay(epsilon, gamma, t, num_qubits),
             math.exp(-gamma * epsilon ** 2 * num_qubits * t)) for t in ts]


def survival_sweep(rho0, H, ts):
    """Rows ``(t, survival, cos^2 bound)``."""
    rep = fleming_report(rho0, H, ts)
    return list(rep.rows)


def write_rows(path, rows, header=("t", "value", "bound")) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([f"{x:.12g}" for x in row])
