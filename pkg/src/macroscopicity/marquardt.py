"""Average number of one-particle operations separating two states.

Layer ``i`` is ``K_i minus K_{i-1}`` where ``K_i`` is spanned by ``P |src>``
over Pauli strings of weight at most ``i`` (applying all one-qubit
operations ``i`` times generates exactly these).  The destination state is
split over the layers, ``|dst> = sum_i nu_i |phi_i>``, and the result is
``sum_i i |nu_i|^2``.

Three exact routes are used, cheapest first:

* product source: local unitaries map the source to ``|0...0>``, where the
  layers are the Hamming-weight sectors;
* stabilizer source: ``P |src>`` depends only on the syndrome of ``P``, so
  the layer weight of each syndrome is its minimal Pauli weight and the
  syndrome distribution of ``dst`` is a Walsh-Hadamard transform of
  stabilizer-group expectation values;
* dense incremental orthonormalization, stopped once the captured norm of
  the destination reaches 1.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import hadamard

from .config import TOL
from .core import SX, SY, SZ, StateVector, apply_local, group_matrix

GENERIC_MAX_QUBITS = 12


@dataclass(frozen=True)
class LayerDecomposition:
    """Layer weights ``nu_i^2`` (index = layer) and the path used."""

    weights: np.ndarray
    method: str

    @property
    def mean(self) -> float:
        return float(np.dot(np.arange(len(self.weights)), self.weights))

    @property
    def captured(self) -> float:
        return float(np.sum(self.weights))


# ---------------------------------------------------------------------------
# product source


def product_factors(psi: StateVector, tol: float = 1e-10):
    """Single-qubit factors of a product state, or ``None``."""
    n = psi.num_qubits
    factors = []
    for q in range(n):
        m = group_matrix(psi.amplitudes, [q], n)
        u, s, _ = np.linalg.svd(m, full_matrices=False)
        if s.size > 1 and s[1] > tol:
            return None
        factors.append(u[:, 0])
    return factors


def _product_layers(src: StateVector, dst: StateVector):
    factors = product_factors(src)
    if factors is None:
        return None
    n = src.num_qubits
    v = dst.amplitudes
    for q, f in enumerate(factors):
        # unitary whose first row is <f|, sending |f> to |0>
        perp = np.array([-np.conj(f[1]), np.conj(f[0])])
        u = np.array([np.conj(f), np.conj(perp)])
        v = apply_local(u, v, [q], n)
    probs = np.abs(v) ** 2
    weights_of = np.array([bin(x).count("1") for x in range(2 ** n)])
    return np.bincount(weights_of, weights=probs, minlength=n + 1)


# ---------------------------------------------------------------------------
# stabilizer source


@dataclass(frozen=True)
class StabilizerGenerators:
    """Generators ``mu_j X^{b_j} Z^{z_j}`` (bit masks, qubit 1 = top bit)."""

    xs: tuple
    zs: tuple
    phases: tuple
    num_qubits: int


def _gf2_basis(vectors):
    """Row-reduced basis (as ints) of the GF(2) span of ``vectors``."""
    basis = []
    for v in vectors:
        for b in basis:
            v = min(v, v ^ b)
        if v:
            basis.append(v)
    return basis


def _gf2_solve(rows, rhs, nbits):
    """Some ``z`` with ``popcount(z & rows[i]) % 2 == rhs[i]``, or ``None``."""
    aug = [(r, t) for r, t in zip(rows, rhs)]
    pivots = []
    for bit in reversed(range(nbits)):
        mask = 1 << bit
        idx = next((i for i, (r, _) in enumerate(aug) if r & mask and i >= len(pivots)), None)
        if idx is None:
            continue
        k = len(pivots)
        aug[k], aug[idx] = aug[idx], aug[k]
        for i in range(len(aug)):
            if i != k and aug[i][0] & mask:
                aug[i] = (aug[i][0] ^ aug[k][0], aug[i][1] ^ aug[k][1])
        pivots.append(mask)
    for r, t in aug[len(pivots):]:
        if r == 0 and t:
            return None
    z = 0
    for mask, (r, t) in zip(pivots, aug):
        if t:
            z |= mask
    return z


def _parity(values: np.ndarray) -> np.ndarray:
    v = values.astype(np.int64)
    out = np.zeros_like(v)
    while np.any(v):
        out ^= v & 1
        v >>= 1
    return out


def stabilizer_generators(psi: StateVector, tol: float = 1e-9):
    """Stabilizer generators of ``psi`` if it is a stabilizer state, else ``None``."""
    n = psi.num_qubits
    amps = psi.amplitudes
    support = np.flatnonzero(np.abs(amps) > tol)
    size = support.size
    if size & (size - 1):
        return None
    mags = np.abs(amps[support])
    if np.max(np.abs(mags - mags[0])) > tol:
        return None
    x0 = int(support[0])
    shifted = support ^ x0
    lbasis = _gf2_basis(int(v) for v in shifted)
    if 2 ** len(lbasis) != size:
        return None
    in_support = np.zeros(2 ** n, dtype=bool)
    in_support[support] = True
    xs, zs, phases = [], [], []
    # X-type generators, one per basis vector of the support's direction space
    for b in lbasis:
        if not np.all(in_support[support ^ b]):
            return None
        ratio = amps[support ^ b] / amps[support]
        rel = ratio / ratio[0]
        if np.max(np.abs(np.abs(rel.real) - 1)) > tol or np.max(np.abs(rel.imag)) > tol:
            return None
        bits = [0 if ((amps[x0 ^ lb ^ b] / amps[x0 ^ lb]) / ratio[0]).real > 0 else 1
                for lb in lbasis]
        z = _gf2_solve(lbasis, bits, n)
        if z is None:
            return None
        signs = 1 - 2 * _parity(np.bitwise_and(support ^ x0, z))
        if np.max(np.abs(rel.real - signs)) > tol:
            return None
        # amp(x ^ b) = ratio0 * (-1)^{z.(x ^ x0)} amp(x), so
        # X^b Z^z |psi> = (-1)^{z.x0} / ratio0 |psi>
        lam = (-1) ** bin(z & x0).count("1") / ratio[0]
        mu = 1.0 / lam
        xs.append(b)
        zs.append(z)
        phases.append(complex(mu))
    # Z-type generators from the orthogonal complement of the direction space
    comp = []
    for cand in range(1, 2 ** n):
        if all(bin(cand & lb).count("1") % 2 == 0 for lb in lbasis):
            red = _gf2_basis(comp + [cand])
            if len(red) > len(comp):
                comp.append(cand)
        if len(comp) == n - len(lbasis):
            break
    for z in comp:
        xs.append(0)
        zs.append(z)
        phases.append(complex((-1) ** bin(z & x0).count("1")))
    gens = StabilizerGenerators(tuple(xs), tuple(zs), tuple(phases), n)
    for j in range(n):
        if np.linalg.norm(_apply_pauli(xs[j], zs[j], phases[j], amps, n) - amps) > 1e-8:
            return None
    return gens


def _apply_pauli(x: int, z: int, mu: complex, v: np.ndarray, n: int) -> np.ndarray:
    """``mu X^x Z^z v`` for bit masks ``x, z``."""
    idx = np.arange(2 ** n)
    src = idx ^ x
    sign = 1 - 2 * _parity(np.bitwise_and(src, z))
    return mu * sign * v[src]


def _min_syndrome_weights(gens: StabilizerGenerators) -> np.ndarray:
    """Minimal Pauli weight for every syndrome (bit j = generator j)."""
    n = gens.num_qubits
    big = np.iinfo(np.int64).max // 4
    best = np.full(2 ** n, big, dtype=np.int64)
    best[0] = 0
    idx = np.arange(2 ** n)
    for q in range(n):
        bit = 1 << (n - 1 - q)
        options = []
        for px, pz in ((1, 0), (0, 1), (1, 1)):
            s = 0
            for j in range(n):
                gx = 1 if gens.xs[j] & bit else 0
                gz = 1 if gens.zs[j] & bit else 0
                if (px * gz + pz * gx) % 2:
                    s |= 1 << j
            options.append(s)
        new = best.copy()
        for s in options:
            new = np.minimum(new, best[idx ^ s] + 1)
        best = new
    return best


def _group_expectations(gens: StabilizerGenerators, v: np.ndarray) -> np.ndarray:
    """``<v| g^T |v>`` for all subsets ``T`` of generators (bit j = gen j)."""
    n = gens.num_qubits
    elems = [(0, 0, 1.0 + 0j)]
    for j in range(n):
        bx, bz, bm = gens.xs[j], gens.zs[j], gens.phases[j]
        # existing elements E (subsets of gens < j) times g_j, ordered so the
        # subset index gains bit j
        elems = elems + [(ex ^ bx, ez ^ bz,
                          em * bm * (-1) ** bin(ez & bx).count("1"))
                         for ex, ez, em in elems]
    out = np.empty(2 ** n)
    for t, (ex, ez, em) in enumerate(elems):
        out[t] = np.vdot(v, _apply_pauli(ex, ez, em, v, n)).real
    return out


def _stabilizer_layers(src: StateVector, dst: StateVector):
    gens = stabilizer_generators(src)
    if gens is None:
        return None
    n = src.num_qubits
    expect = _group_expectations(gens, dst.amplitudes)
    # p(s) = 2^-n sum_T (-1)^{s.T} <g^T>; hadamard() is in natural bit order
    probs = hadamard(2 ** n) @ expect / 2 ** n
    probs = np.clip(probs, 0.0, None)
    weights = _min_syndrome_weights(gens)
    return np.bincount(weights, weights=probs, minlength=n + 1)


# ---------------------------------------------------------------------------
# generic


_SINGLE = (SX, SY, SZ)


def _generic_layers(src: StateVector, dst: StateVector, rank_tol: float):
    n = src.num_qubits
    if n > GENERIC_MAX_QUBITS:
        raise ValueError(f"dense layer construction is limited to N <= {GENERIC_MAX_QUBITS}")
    basis = src.amplitudes[:, None].copy()
    layer = basis
    target = dst.amplitudes
    weights = [abs(np.vdot(src.amplitudes, target)) ** 2]
    while sum(weights) < 1 - 1e-12 and layer.shape[1]:
        cands = np.concatenate([apply_local(p, layer, [q], n)
                                for q in range(n) for p in _SINGLE], axis=1)
        for _ in range(2):
            cands = cands - basis @ (basis.conj().T @ cands)
        u, s, _ = np.linalg.svd(cands, full_matrices=False)
        layer = u[:, s > rank_tol * max(1.0, s[0] if s.size else 1.0)] if s.size else u[:, :0]
        basis = np.concatenate([basis, layer], axis=1)
        weights.append(float(np.sum(np.abs(layer.conj().T @ target) ** 2)))
    return np.array(weights)


def layer_decomposition(src: StateVector, dst: StateVector, method: str = "auto") -> LayerDecomposition:
    """Split ``dst`` over the layers generated from ``src``.

    ``method`` is ``auto``, ``product``, ``stabilizer`` or ``generic``.
    """
    if src.num_qubits != dst.num_qubits:
        raise ValueError("states have different qubit counts")
    routes = {"product": _product_layers, "stabilizer": _stabilizer_layers}
    order = ["product", "stabilizer"] if method == "auto" else [method]
    for name in order:
        if name == "generic":
            break
        w = routes[name](src, dst)
        if w is not None:
            return LayerDecomposition(w, name)
        if method != "auto":
            raise ValueError(f"source state does not admit the {name} route")
    w = _generic_layers(src, dst, TOL.marquardt_rank)
    residual = 1.0 - float(np.sum(w))
    if residual > 1e-8:
        raise RuntimeError(f"layers do not exhaust the destination state (residual {residual:.3g})")
    return LayerDecomposition(w, "generic")
