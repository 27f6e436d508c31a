"""Quantum Fisher information, its maximization over local operators and the
effective size ``N_eff^F``.

For a fixed state the QFI is a quadratic form in the operator.  Writing every
group term in its traceless Pauli basis, ``A = sum_a x_a P_a``, gives
``F(rho, A) = 4 x^T K x`` with a real PSD Gram matrix ``K`` (the covariance
matrix of the generators for pure states).  Maximizing a convex quadratic
over per-group norm balls is done by block-coordinate ascent:

* single-qubit blocks: the exact maximizer of ``x^T M x + 2 b^T x`` on the
  unit sphere (trust-region secular equation);
* multi-qubit blocks: the linearization step ``T <- sign(grad)``, which can
  only increase a convex objective.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .config import TOL
from .core import (DensityOperator, StateVector, apply_local, as_density,
                   as_matrix)
from .observables import (Grouping, LocalOperator, default_groupings,
                          from_coordinates, pauli_basis, coordinates)


# ---------------------------------------------------------------------------
# plain QFI


def _spectrum(rho: np.ndarray, cutoff: float):
    w, v = np.linalg.eigh(rho)
    keep = w > cutoff
    return w[keep], v[:, keep]


def qfi(rho, A) -> float:
    """Mixed-state QFI ``2 sum (p_i - p_j)^2/(p_i + p_j) |<i|A|j>|^2``.

    Eigenvalues below the rank cutoff are treated as zero; pairs with
    ``p_i + p_j`` below the cutoff are dropped.  A ``StateVector`` skips the
    eigendecomposition and uses the variance form.
    """
    if isinstance(rho, StateVector):
        return qfi_pure(rho, A)
    rho = as_density(rho)
    a = as_matrix(A)
    if a.shape != rho.matrix.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {rho.matrix.shape}")
    w, v = np.linalg.eigh(rho.matrix)
    w = np.where(w > TOL.rank_cutoff, w, 0.0)
    amat = v.conj().T @ a @ v
    s = w[:, None] + w[None, :]
    d = (w[:, None] - w[None, :]) ** 2
    weight = np.divide(d, s, out=np.zeros_like(s), where=s > TOL.rank_cutoff)
    return float(2.0 * np.sum(weight * np.abs(amat) ** 2))


def qfi_pure(psi: StateVector, A) -> float:
    """``4 (<A^2> - <A>^2)`` on a pure state."""
    v = psi.amplitudes
    av = A.apply(v) if isinstance(A, LocalOperator) else as_matrix(A) @ v
    mean = np.vdot(v, av).real
    return float(4.0 * max(np.vdot(av, av).real - mean ** 2, 0.0))


def qfi_any(state, A) -> float:
    if isinstance(state, StateVector):
        return qfi_pure(state, A)
    return qfi(state, A)


# ---------------------------------------------------------------------------
# Gram form


@dataclass(frozen=True)
class _Support:
    """Eigen-support of a state: weights ``p`` and columns ``U``."""

    p: np.ndarray
    u: np.ndarray
    num_qubits: int
    pure: bool


def support_of(state) -> _Support:
    if isinstance(state, StateVector):
        return _Support(np.ones(1), state.amplitudes[:, None], state.num_qubits, True)
    rho = as_density(state)
    p, u = _spectrum(rho.matrix, TOL.rank_cutoff)
    return _Support(p, u, rho.num_qubits, len(p) == 1 and abs(p[0] - 1) < 1e-12)


def _group_images(sup: _Support, group) -> np.ndarray:
    """``P_a U`` for every traceless Pauli string ``P_a`` on ``group``."""
    _, basis = pauli_basis(len(group))
    qubits0 = [q - 1 for q in group]
    return np.stack([apply_local(p, sup.u, qubits0, sup.num_qubits) for p in basis])


def gram_matrix(sup: _Support, images: np.ndarray) -> np.ndarray:
    """Real PSD matrix ``K`` with ``F(rho, sum x_a P_a) = 4 x^T K x``.

    ``images`` has shape ``(D, 2^N, r)`` holding ``P_a |i>`` for the ``r``
    support vectors.
    """
    p = sup.p
    D = images.shape[0]
    if sup.pure:
        v = images[:, :, 0]
        m = v @ sup.u[:, 0].conj()
        k = (v.conj() @ v.T).real - np.outer(m.real, m.real)
        return 0.5 * (k + k.T)
    r = len(p)
    # M_a[i, j] = <i|P_a|j>
    m = np.einsum("xi,axj->aij", sup.u.conj(), images)
    s = p[:, None] + p[None, :]
    w = (p[:, None] - p[None, :]) ** 2 / s
    mf = m.reshape(D, r * r)
    q = 2.0 * (mf * w.reshape(-1)) @ mf.conj().T
    # pairs with one index outside the support
    vw = images * np.sqrt(p)[None, None, :]
    vf = vw.reshape(D, -1)
    q = q + 4.0 * (vf @ vf.conj().T)
    mw = (m * p[None, None, :]).reshape(D, r * r)
    q = q - 4.0 * (mw @ mf.conj().T)
    k = 0.25 * q.real
    return 0.5 * (k + k.T)


# ---------------------------------------------------------------------------
# optimizer


@dataclass(frozen=True)
class OptimizerConfig:
    """Settings for :func:`maximize_qfi`.

    Parameters
    ----------
    random_starts : int
        Random initializations on top of the structured starts.
    seed : int
    rtol : float
        Stop when a full sweep improves the objective by less than ``rtol``
        relative to its value.
    max_iters : int
        Maximum number of sweeps per start.
    """

    random_starts: int = 8
    seed: int = 0
    rtol: float = 1e-9
    max_iters: int = 500


DEFAULT_OPTIMIZER = OptimizerConfig()


@dataclass(frozen=True, eq=False)
class QfiResult:
    value: float
    operator: LocalOperator
    grouping: Grouping
    neff: float
    converged: bool = True
    iterations: int = 0
    diagnostics: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "value": self.value,
            "neff": self.neff,
            "grouping": str(self.grouping),
            "converged": self.converged,
            "iterations": self.iterations,
            "witness": self.operator.to_json(),
        }


def sphere_quadratic_max(M: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Global maximizer of ``x^T M x + 2 b^T x`` subject to ``|x| = 1``.

    Stationary points satisfy ``(lam I - M) x = b``; the global maximum has
    ``lam >= lambda_max(M)``, found by Newton's method on the secular
    equation started left of the root.  The degenerate ("hard") case where
    ``b`` has no weight on the top eigenspace is handled explicitly.
    """
    mu, vecs = np.linalg.eigh(M)
    bt = vecs.T @ b
    top = mu[-1]
    scale = max(1.0, abs(top), float(np.max(np.abs(mu))))
    on_top = mu >= top - 1e-12 * scale
    btop = math.sqrt(float(np.sum(bt[on_top] ** 2)))
    rest = ~on_top
    if btop <= 1e-12 * max(1.0, float(np.linalg.norm(b))):
        y = np.zeros_like(bt)
        y[rest] = bt[rest] / (top - mu[rest])
        r = float(np.sum(y ** 2))
        if r <= 1.0:
            y[np.flatnonzero(on_top)[-1]] = math.sqrt(1.0 - r)
            return vecs @ y
    # h is convex and decreasing on (top, inf); h(hi) <= 0 and Newton from
    # the left of the root is monotone, bisection guards the degenerate start
    lo, hi = top, top + float(np.linalg.norm(b)) + 1e-300
    lam = top + btop if btop > 1e-12 * scale else 0.5 * (lo + hi)
    for _ in range(200):
        den = lam - mu
        h = float(np.sum(bt ** 2 / den ** 2)) - 1.0
        if h > 0:
            lo = lam
        else:
            hi = lam
        dh = -2.0 * float(np.sum(bt ** 2 / den ** 3))
        lam_new = lam - h / dh if dh < 0 else 0.5 * (lo + hi)
        if not lo < lam_new <= hi:
            lam_new = 0.5 * (lo + hi)
        if abs(lam_new - lam) <= 1e-15 * max(1.0, abs(lam)) or hi - lo <= 1e-15 * scale:
            lam = lam_new
            break
        lam = lam_new
    y = bt / (lam - mu)
    x = vecs @ y
    return x / np.linalg.norm(x)


class _Blocks:
    """Index bookkeeping for per-group coordinate blocks."""

    def __init__(self, grouping: Grouping):
        self.sizes = [len(g) for g in grouping.groups]
        self.dims = [4 ** k - 1 for k in self.sizes]
        self.offsets = np.concatenate([[0], np.cumsum(self.dims)]).astype(int)
        self.total = int(self.offsets[-1])

    def sl(self, i: int) -> slice:
        return slice(self.offsets[i], self.offsets[i + 1])


def _project_block(x: np.ndarray, k: int) -> np.ndarray:
    """Map a coordinate block to a feasible extreme term."""
    if k == 1:
        n = np.linalg.norm(x)
        return x / n if n > 0 else np.array([0.0, 0.0, 1.0])
    t = from_coordinates(x, k)
    w, v = np.linalg.eigh(t)
    s = np.where(w >= 0, 1.0, -1.0)
    if np.all(s == s[0]):
        s[0] = -s[0]
    sign = (v * s) @ v.conj().T
    return coordinates(sign - np.trace(sign) / sign.shape[0] * np.eye(sign.shape[0]))


def _starts(K: np.ndarray, blocks: _Blocks, config: OptimizerConfig):
    labels = {k: pauli_basis(k)[0] for k in set(blocks.sizes)}
    starts = []
    for axis in "xyz":
        x = np.zeros(blocks.total)
        for i, k in enumerate(blocks.sizes):
            blk = np.zeros(blocks.dims[i])
            for j, lab in enumerate(labels[k]):
                letters = lab.replace("i", "")
                if letters == axis:
                    blk[j] = 1.0 / k
            x[blocks.sl(i)] = blk
        starts.append(("collective_" + axis, x))
    if any(k > 1 for k in blocks.sizes):
        for axis in "xyz":
            x = np.zeros(blocks.total)
            for i, k in enumerate(blocks.sizes):
                blk = np.zeros(blocks.dims[i])
                blk[labels[k].index(axis * k)] = 1.0
                x[blocks.sl(i)] = blk
            starts.append(("parity_" + axis, x))
    w, v = np.linalg.eigh(K)
    top = v[:, -1]
    x = np.concatenate([_project_block(top[blocks.sl(i)], k)
                        for i, k in enumerate(blocks.sizes)])
    starts.append(("spectral", x))
    rng = np.random.default_rng(config.seed)
    for r in range(config.random_starts):
        x = np.concatenate([_project_block(rng.standard_normal(blocks.dims[i]), k)
                            for i, k in enumerate(blocks.sizes)])
        starts.append((f"random_{r}", x))
    return starts


def _ascend(K: np.ndarray, x: np.ndarray, blocks: _Blocks, config: OptimizerConfig):
    x = x.copy()
    f = float(x @ K @ x)
    kx = K @ x
    for it in range(1, config.max_iters + 1):
        f_old = f
        for i, k in enumerate(blocks.sizes):
            sl = blocks.sl(i)
            xi = x[sl]
            Kii = K[sl, sl]
            b = kx[sl] - Kii @ xi
            if k == 1:
                cand = sphere_quadratic_max(Kii, b)
            else:
                cand = _project_block(Kii @ xi + b, k)
            gain = cand @ Kii @ cand + 2 * b @ cand - (xi @ Kii @ xi + 2 * b @ xi)
            if gain > 0:
                kx += K[:, sl] @ (cand - xi)
                x[sl] = cand
        f = float(x @ K @ x)
        if f - f_old <= config.rtol * max(abs(f), 1e-300):
            return x, f, True, it
    return x, f, False, config.max_iters


def _witness(x: np.ndarray, K: np.ndarray, blocks: _Blocks, grouping: Grouping,
             num_qubits: int) -> LocalOperator:
    """Unit-norm terms from coordinates; blocks with spectral width below 2
    are stretched to width 2 in whichever direction does not lose value."""
    terms = []
    x = x.copy()
    for i, k in enumerate(blocks.sizes):
        sl = blocks.sl(i)
        t = from_coordinates(x[sl], k)
        w = np.linalg.eigvalsh(t)
        width = w[-1] - w[0]
        if width < 2.0 - 1e-9:
            if width < 1e-9:
                d = np.zeros(blocks.dims[i])
                d[pauli_basis(k)[0].index("z" + "i" * (k - 1))] = 1.0
            else:
                d = x[sl] * (2.0 / width)
            best = None
            for cand in (d, -d):
                y = x.copy()
                y[sl] = cand
                val = y @ K @ y
                if best is None or val > best[0]:
                    best = (val, cand)
            x[sl] = best[1]
            t = from_coordinates(x[sl], k)
            w = np.linalg.eigvalsh(t)
        shifted = t - 0.5 * (w[-1] + w[0]) * np.eye(2 ** k)
        terms.append(shifted)
    return LocalOperator(grouping, tuple(terms), num_qubits), x


def group_gram(state, grouping: Grouping, cache: dict | None = None) -> np.ndarray:
    """Gram matrix ``K`` of ``state`` in the Pauli coordinates of ``grouping``.

    ``cache`` (a plain dict) keeps the support and per-group images so that
    several groupings of the same state share work.
    """
    if cache is None:
        cache = {}
    if "support" not in cache:
        cache["support"] = support_of(state)
    sup = cache["support"]
    grouping.check_fits(sup.num_qubits)
    images = []
    for g in grouping.groups:
        key = ("images", g)
        if key not in cache:
            cache[key] = _group_images(sup, g)
        images.append(cache[key])
    return gram_matrix(sup, np.concatenate(images, axis=0))


def maximize_form(K: np.ndarray, grouping: Grouping,
                  config: OptimizerConfig = DEFAULT_OPTIMIZER):
    """Maximize ``x^T K x`` over unit-norm local terms on ``grouping``.

    Returns ``(operator, coords, value, converged, iterations, start)`` where
    ``value = x^T K x`` at the returned witness.
    """
    blocks = _Blocks(grouping)
    if K.shape != (blocks.total, blocks.total):
        raise ValueError("Gram matrix does not match the grouping")
    best = None
    total_iters = 0
    for name, x0 in _starts(K, blocks, config):
        x, f, conv, it = _ascend(K, x0, blocks, config)
        total_iters += it
        if best is None or f > best[1] + 1e-12 * max(1.0, abs(f)):
            best = (x, f, conv, name)
    x, f, conv, name = best
    n_qubits = max(grouping.qubits)
    op, x = _witness(x, K, blocks, grouping, n_qubits)
    return op, x, max(float(x @ K @ x), 0.0), conv, total_iters, name


def maximize_qfi(state, grouping: Grouping | str, config: OptimizerConfig = DEFAULT_OPTIMIZER,
                 _cache: dict | None = None) -> QfiResult:
    """Maximize ``F(rho, A)`` over local operators ``A`` on ``grouping``.

    Parameters
    ----------
    state : StateVector or DensityOperator
    grouping : Grouping or str
    config : OptimizerConfig

    Returns
    -------
    QfiResult
        Best value over all starts with its witness; ``neff = value / (4 n)``.
    """
    if isinstance(grouping, str):
        grouping = Grouping.parse(grouping)
    K = group_gram(state, grouping, _cache)
    op, x, f, conv, iters, name = maximize_form(K, grouping, config)
    if op.num_qubits != state.num_qubits:
        op = LocalOperator(grouping, op.terms, state.num_qubits)
    value = 4.0 * f
    return QfiResult(value, op, grouping, value / (4 * grouping.n), conv, iters,
                     {"start": name})


def neff_f(state, max_group_size: int = 1, config: OptimizerConfig = DEFAULT_OPTIMIZER,
           extra_groupings=()) -> QfiResult:
    """Largest ``max_A F / (4 n)`` over the default groupings."""
    n_qubits = state.num_qubits
    cache = {}
    best = None
    for g in default_groupings(n_qubits, max_group_size, extra_groupings):
        res = maximize_qfi(state, g, config, _cache=cache)
        if best is None or res.neff > best.neff + 1e-12:
            best = res
    return best


# ---------------------------------------------------------------------------
# producibility and additivity


@dataclass(frozen=True)
class ProducibilityBound:
    k: int
    N: int
    bound: float

    @property
    def s(self) -> int:
        return self.N // self.k


def producibility_bound(N: int, k: int) -> ProducibilityBound:
    """``s k^2 + (N - s k)^2`` with ``s = floor(N / k)``: the largest variance
    of a collective spin-1/2-normalized local generator on a k-producible
    state (QFI bound is 4 times this)."""
    if not 1 <= k <= N:
        raise ValueError("need 1 <= k <= N")
    s = N // k
    return ProducibilityBound(k, N, float(s * k * k + (N - s * k) ** 2))


def random_producible_state(partition: Grouping, num_qubits: int, rng) -> StateVector:
    """Haar-like random product of pure factors on the groups of ``partition``."""
    amps = np.ones(1, dtype=complex)
    order = []
    for g in partition.groups:
        d = 2 ** len(g)
        f = rng.standard_normal(d) + 1j * rng.standard_normal(d)
        amps = np.kron(amps, f / np.linalg.norm(f))
        order.extend(g)
    # the kron above is in partition order; move qubits to their labels
    t = amps.reshape((2,) * num_qubits)
    t = np.moveaxis(t, list(range(num_qubits)), [q - 1 for q in order])
    return StateVector(t.reshape(-1), num_qubits)


def check_producible_bound(state, partition: Grouping, generator=None,
                           config: OptimizerConfig | None = None) -> bool:
    """Check ``F <= 4 (s k^2 + (N - s k)^2)`` for a state that is a product
    over ``partition``.  Without ``generator`` the singleton-grouping QFI is
    maximized, which is the strongest form of the check."""
    n = state.num_qubits
    k = max(len(g) for g in partition.groups)
    bound = producibility_bound(n, k).bound
    if generator is None:
        cfg = config or OptimizerConfig(random_starts=0)
        value = maximize_qfi(state, Grouping.singletons(n), cfg).value
    else:
        value = qfi_any(state, generator)
    return value <= 4.0 * bound + 1e-8


def variance_additivity_check(factors, A: LocalOperator) -> bool:
    """Variance of a local operator on a product state is the sum of the
    per-factor variances."""
    from .observables import local_mean_variance
    sizes = [f.num_qubits for f in factors]
    bounds = np.cumsum([0] + sizes)
    owner = {}
    for idx in range(len(sizes)):
        for q in range(bounds[idx] + 1, bounds[idx + 1] + 1):
            owner[q] = idx
    if A.num_qubits != bounds[-1]:
        raise ValueError("operator size does not match the product")
    per_factor = [[] for _ in factors]
    for g, t in zip(A.grouping.groups, A.terms):
        owners = {owner[q] for q in g}
        if len(owners) != 1:
            raise ValueError(f"group {g} crosses a factor boundary")
        f = owners.pop()
        per_factor[f].append((tuple(q - bounds[f] for q in g), t))
    amps = factors[0].amplitudes
    for f in factors[1:]:
        amps = np.kron(amps, f.amplitudes)
    total = StateVector(amps / np.linalg.norm(amps), int(bounds[-1]))
    v_total = local_mean_variance(total, A)[1]
    v_sum = 0.0
    for f, items in zip(factors, per_factor):
        if not items:
            continue
        sub = LocalOperator(Grouping(tuple(g for g, _ in items)), tuple(t for _, t in items),
                            f.num_qubits)
        v_sum += local_mean_variance(f, sub)[1]
    return abs(v_total - v_sum) <= 1e-8
