"""Groupings of qubits and sums of local unit-norm terms.

A :class:`LocalOperator` is ``A = sum_g A_g`` where each ``A_g`` acts on one
group of a :class:`Grouping` and has operator norm 1.  Single-qubit terms
are parameterized as ``n . sigma``; multi-qubit terms live in the traceless
Pauli-string basis of the group.  Adding a multiple of the identity to a
term never changes a variance or a Fisher information, it only uses up
norm, so nothing is lost by restricting to traceless terms.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .config import TOL
from .core import (SX, SY, SZ, HermitianOperator, StateVector, apply_local,
                   kron_all, PAULIS)

AXES = {"x": SX, "y": SY, "z": SZ}


@dataclass(frozen=True)
class Grouping:
    """Disjoint groups of 1-based qubit labels.

    Parameters
    ----------
    groups : tuple of tuple of int
        Groups in order; labels within a group keep the given order.
    max_group_size : int, optional
        Upper bound on the group size, defaults to the largest group.
    """

    groups: tuple
    max_group_size: int | None = None

    def __post_init__(self):
        groups = tuple(tuple(int(q) for q in g) for g in self.groups)
        if not groups or any(len(g) == 0 for g in groups):
            raise ValueError("a grouping needs at least one non-empty group")
        flat = [q for g in groups for q in g]
        if len(set(flat)) != len(flat):
            raise ValueError(f"groups overlap: {groups}")
        if min(flat) < 1:
            raise ValueError("qubit labels are 1-based")
        largest = max(len(g) for g in groups)
        bound = largest if self.max_group_size is None else int(self.max_group_size)
        if largest > bound:
            raise ValueError(f"group of size {largest} exceeds max_group_size={bound}")
        object.__setattr__(self, "groups", groups)
        object.__setattr__(self, "max_group_size", bound)

    @property
    def n(self) -> int:
        return len(self.groups)

    @property
    def qubits(self) -> tuple:
        return tuple(q for g in self.groups for q in g)

    def check_fits(self, num_qubits: int) -> None:
        if max(self.qubits) > num_qubits:
            raise ValueError(f"grouping {self} does not fit {num_qubits} qubits")

    def relabel(self, perm) -> "Grouping":
        """Apply ``q -> perm[q - 1]`` to every label."""
        return Grouping(tuple(tuple(perm[q - 1] for q in g) for g in self.groups),
                        self.max_group_size)

    @classmethod
    def singletons(cls, num_qubits: int) -> "Grouping":
        return cls(tuple((q,) for q in range(1, num_qubits + 1)))

    @classmethod
    def parse(cls, text: str) -> "Grouping":
        """Parse ``"1|2|3"``, ``"1-3|4-6"`` or ``"2-4|5-7|8,9,1"``."""
        groups = []
        for chunk in text.split("|"):
            members = []
            for item in chunk.split(","):
                item = item.strip()
                if not item:
                    continue
                if "-" in item:
                    lo, hi = (int(v) for v in item.split("-", 1))
                    if hi < lo:
                        raise ValueError(f"bad range {item!r}")
                    members.extend(range(lo, hi + 1))
                else:
                    members.append(int(item))
            groups.append(tuple(members))
        return cls(tuple(groups))

    def __str__(self) -> str:
        parts = []
        for g in self.groups:
            if len(g) > 1 and list(g) == list(range(g[0], g[0] + len(g))):
                parts.append(f"{g[0]}-{g[-1]}")
            else:
                parts.append(",".join(map(str, g)))
        return "|".join(parts)


def default_groupings(num_qubits: int, max_group_size: int = 1, extra=()) -> list:
    """Contiguous partitions with block sizes ``1..max_group_size``.

    Every cyclic shift of each block pattern is included, so e.g. ``N=9``
    with size 3 yields ``1-3|4-6|7-9``, ``2-4|5-7|8,9,1`` and
    ``3-5|6-8|9,1,2``.  When ``N`` is not a multiple of the block size the
    last block is shorter.  ``extra`` groupings are appended verbatim.
    """
    if not 1 <= max_group_size:
        raise ValueError("max_group_size must be >= 1")
    out, seen = [], set()
    for size in range(1, min(max_group_size, num_qubits) + 1):
        for shift in range(size):
            order = [(shift + i) % num_qubits + 1 for i in range(num_qubits)]
            groups = tuple(tuple(order[i:i + size]) for i in range(0, num_qubits, size))
            key = frozenset(frozenset(g) for g in groups)
            if key not in seen:
                seen.add(key)
                out.append(Grouping(groups))
    for g in extra:
        g = g if isinstance(g, Grouping) else Grouping.parse(g)
        g.check_fits(num_qubits)
        key = frozenset(frozenset(x) for x in g.groups)
        if key not in seen:
            seen.add(key)
            out.append(g)
    return out


@lru_cache(maxsize=None)
def pauli_basis(k: int):
    """Traceless Pauli strings on ``k`` qubits as ``(labels, matrices)``.

    Ordered lexicographically over ``ixyz`` with the identity string dropped,
    so for ``k = 1`` the basis is ``(x, y, z)``.
    """
    labels, mats = [], []
    for letters in itertools.product("ixyz", repeat=k):
        label = "".join(letters)
        if set(label) == {"i"}:
            continue
        labels.append(label)
        mats.append(kron_all(PAULIS[c] for c in label))
    arr = np.array(mats)
    arr.setflags(write=False)
    return tuple(labels), arr


def coordinates(term: np.ndarray) -> np.ndarray:
    """Real Pauli coordinates ``x_a = Tr(P_a T) / 2^k`` of a group term."""
    term = np.asarray(term)
    d = term.shape[0]
    k = d.bit_length() - 1
    _, basis = pauli_basis(k)
    return np.einsum("aij,ji->a", basis, term).real / d


def from_coordinates(x: np.ndarray, k: int) -> np.ndarray:
    _, basis = pauli_basis(k)
    return np.tensordot(np.asarray(x, dtype=float), basis, axes=1)


def spectral_width(term: np.ndarray) -> float:
    w = np.linalg.eigvalsh(term)
    return float(w[-1] - w[0])


def normalize_term(term: np.ndarray) -> np.ndarray:
    """Shift and scale a Hermitian term so its spectrum spans ``[-1, 1]``."""
    w = np.linalg.eigvalsh(term)
    width = w[-1] - w[0]
    if width <= TOL.decomposition:
        raise ValueError("term is proportional to the identity")
    shifted = term - 0.5 * (w[-1] + w[0]) * np.eye(term.shape[0])
    return shifted * (2.0 / width)


@dataclass(frozen=True, eq=False)
class LocalOperator:
    """``A = sum_g A_g`` with every term of operator norm 1.

    Parameters
    ----------
    grouping : Grouping
    terms : sequence of ndarray
        ``terms[i]`` is a ``2^k x 2^k`` Hermitian matrix on
        ``grouping.groups[i]`` (first listed qubit most significant).
    num_qubits : int
    """

    grouping: Grouping
    terms: tuple
    num_qubits: int

    def __post_init__(self):
        self.grouping.check_fits(self.num_qubits)
        if len(self.terms) != self.grouping.n:
            raise ValueError("need one term per group")
        terms = []
        for g, t in zip(self.grouping.groups, self.terms):
            t = np.array(t, dtype=complex)
            d = 2 ** len(g)
            if t.shape != (d, d):
                raise ValueError(f"term on group {g} must be {d}x{d}")
            if np.max(np.abs(t - t.conj().T)) > TOL.construction:
                raise ValueError(f"term on group {g} is not Hermitian")
            norm = np.max(np.abs(np.linalg.eigvalsh(t)))
            if abs(norm - 1.0) > TOL.decomposition:
                raise ValueError(f"term on group {g} has operator norm {norm:.6g}, need 1")
            t.setflags(write=False)
            terms.append(t)
        object.__setattr__(self, "terms", tuple(terms))

    def apply(self, vecs: np.ndarray) -> np.ndarray:
        """``A @ vecs`` without forming the full matrix."""
        out = np.zeros_like(vecs, dtype=complex)
        for g, t in zip(self.grouping.groups, self.terms):
            out += apply_local(t, vecs, [q - 1 for q in g], self.num_qubits)
        return out

    def to_matrix(self) -> np.ndarray:
        return assemble(self).matrix

    def scaled(self, signs) -> "LocalOperator":
        """Flip the sign of selected terms (signs are +-1)."""
        return LocalOperator(self.grouping, tuple(s * t for s, t in zip(signs, self.terms)),
                             self.num_qubits)

    def to_json(self) -> dict:
        groups = []
        for g, t in zip(self.grouping.groups, self.terms):
            labels, _ = pauli_basis(len(g))
            shift = float(np.trace(t).real) / t.shape[0]
            coords = coordinates(t)
            groups.append({
                "qubits": list(g),
                "identity": shift,
                "coefficients": {lab: float(c) for lab, c in zip(labels, coords)
                                 if abs(c) > 1e-12},
            })
        return {"num_qubits": self.num_qubits, "grouping": str(self.grouping),
                "terms": groups}


def assemble(op: LocalOperator) -> HermitianOperator:
    """Full ``2^N x 2^N`` matrix of a local operator."""
    n = op.num_qubits
    total = np.zeros((2 ** n, 2 ** n), dtype=complex)
    for g, t in zip(op.grouping.groups, op.terms):
        total += embed(t, g, n)
    return HermitianOperator(total)


def embed(term: np.ndarray, group, num_qubits: int) -> np.ndarray:
    """Matrix of ``term`` acting on the 1-based qubits ``group``."""
    eye = np.eye(2 ** num_qubits, dtype=complex)
    return apply_local(term, eye, [q - 1 for q in group], num_qubits)


def _axis_matrix(axis) -> np.ndarray:
    if isinstance(axis, str):
        key = axis.lower()
        if key not in AXES:
            raise ValueError(f"axis must be x, y, z or a 3-vector, got {axis!r}")
        return AXES[key]
    v = np.asarray(axis, dtype=float)
    if v.shape != (3,) or np.linalg.norm(v) < 1e-12:
        raise ValueError("axis vector must be a nonzero 3-vector")
    v = v / np.linalg.norm(v)
    return v[0] * SX + v[1] * SY + v[2] * SZ


def collective_pauli(num_qubits: int, axis="z") -> LocalOperator:
    """``sum_i n . sigma^(i)`` over the singleton grouping."""
    m = _axis_matrix(axis)
    return LocalOperator(Grouping.singletons(num_qubits), (m,) * num_qubits, num_qubits)


@dataclass(frozen=True, eq=False)
class BlochParameterization:
    """Per-group parameters: a unit Bloch vector for singletons, a traceless
    Hermitian term otherwise.  :meth:`to_local_operator` rescales multi-qubit
    terms to unit norm."""

    grouping: Grouping
    params: tuple

    def __post_init__(self):
        if len(self.params) != self.grouping.n:
            raise ValueError("need one parameter per group")
        for g, p in zip(self.grouping.groups, self.params):
            if len(g) == 1:
                v = np.asarray(p, dtype=float)
                if v.shape != (3,) or abs(np.linalg.norm(v) - 1) > TOL.decomposition:
                    raise ValueError(f"Bloch vector for qubit {g[0]} must be a unit 3-vector")

    def to_local_operator(self, num_qubits: int) -> LocalOperator:
        terms = []
        for g, p in zip(self.grouping.groups, self.params):
            if len(g) == 1:
                terms.append(_axis_matrix(np.asarray(p, dtype=float)))
            else:
                t = np.asarray(p, dtype=complex)
                terms.append(normalize_term(t - np.trace(t) / t.shape[0] * np.eye(t.shape[0])))
        return LocalOperator(self.grouping, tuple(terms), num_qubits)


def local_mean_variance(psi: StateVector, op: LocalOperator) -> tuple[float, float]:
    """Mean and variance of a local operator on a pure state."""
    v = psi.amplitudes
    av = op.apply(v)
    mean = float(np.vdot(v, av).real)
    second = float(np.vdot(av, av).real)
    return mean, max(second - mean ** 2, 0.0)


def variance(state, op) -> float:
    """Variance of ``op`` (LocalOperator or matrix) on a pure or mixed state."""
    from .core import as_density, as_matrix
    if isinstance(state, StateVector) and isinstance(op, LocalOperator):
        return local_mean_variance(state, op)[1]
    m = as_matrix(op)
    if isinstance(state, StateVector):
        v = state.amplitudes
        mv = m @ v
        mean = np.vdot(v, mv).real
        return float(max(np.vdot(mv, mv).real - mean ** 2, 0.0))
    rho = as_density(state).matrix
    mean = np.trace(rho @ m).real
    return float(max(np.trace(rho @ m @ m).real - mean ** 2, 0.0))
