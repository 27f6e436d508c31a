"""Comparative effective-size measures for states and superpositions.

Each measure returns a :class:`MeasureResult` with the value, a witness that
reproduces it and diagnostics.  Measures defined only for superpositions
take a :class:`Superposition`.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .config import TOL
from .core import (DensityOperator, StateVector, as_density, group_matrix,
                   reduced_trace_distance, trace_norm)
from .fisher import (DEFAULT_OPTIMIZER, OptimizerConfig, group_gram,
                     maximize_form, neff_f)
from .marquardt import layer_decomposition
from .observables import (Grouping, LocalOperator, collective_pauli,
                          default_groupings, local_mean_variance)

MEASURES = ("neff_f", "index_p", "index_q", "rel_fisher", "bjork_mana", "korsbakken",
            "marquardt")


class MeasureUndefined(RuntimeError):
    """The measure has no value for this input (e.g. no orthogonalization)."""


class SingularMeasure(ArithmeticError):
    """A denominator vanished."""


@dataclass(frozen=True, eq=False)
class Superposition:
    """``(psi0 + psi1) / sqrt(2 (1 + Re<psi0|psi1>))``.

    Parameters
    ----------
    psi0, psi1 : StateVector
    name : str, optional
    """

    psi0: StateVector
    psi1: StateVector
    name: str = ""

    def __post_init__(self):
        if self.psi0.num_qubits != self.psi1.num_qubits:
            raise ValueError("branches have different qubit counts")

    @property
    def num_qubits(self) -> int:
        return self.psi0.num_qubits

    @property
    def overlap(self) -> complex:
        return complex(np.vdot(self.psi0.amplitudes, self.psi1.amplitudes))

    @property
    def combined(self) -> StateVector:
        norm = math.sqrt(2.0 * (1.0 + self.overlap.real))
        return StateVector((self.psi0.amplitudes + self.psi1.amplitudes) / norm,
                           self.num_qubits)


@dataclass(frozen=True, eq=False)
class MeasureResult:
    measure_id: str
    neff: float
    witness: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)
    undefined: bool = False

    def to_json(self) -> dict:
        return {"measure": self.measure_id, "neff": self.neff, "undefined": self.undefined,
                "witness": self.witness, "diagnostics": self.diagnostics}


# ---------------------------------------------------------------------------
# Fisher-based


def neff_f_measure(state, max_group_size: int = 1,
                   config: OptimizerConfig = DEFAULT_OPTIMIZER) -> MeasureResult:
    res = neff_f(state, max_group_size, config)
    return MeasureResult("neff_f", res.neff, {"qfi": res.value, **res.to_json()},
                         {"converged": res.converged})


def relative_fisher(sup: Superposition, max_group_size: int = 1,
                    config: OptimizerConfig = DEFAULT_OPTIMIZER) -> MeasureResult:
    """``N_eff^F(psi) / (N_eff^F(psi0) / 2 + N_eff^F(psi1) / 2)``."""
    return _relative(sup.combined, sup.psi0, sup.psi1, max_group_size, config, "rel_fisher")


def _relative(psi, a, b, max_group_size, config, mid) -> MeasureResult:
    top = neff_f(psi, max_group_size, config)
    r0 = neff_f(a, max_group_size, config)
    r1 = neff_f(b, max_group_size, config)
    den = 0.5 * (r0.neff + r1.neff)
    if den < 1e-12:
        raise SingularMeasure("both branches have vanishing Fisher effective size")
    witness = {"numerator": top.neff, "branch0": r0.neff, "branch1": r1.neff,
               "grouping": str(top.grouping), "grouping0": str(r0.grouping),
               "grouping1": str(r1.grouping)}
    conv = top.converged and r0.converged and r1.converged
    return MeasureResult(mid, top.neff / den, witness, {"converged": conv})


def relative_fisher_noisy(sup: Superposition, channel, max_group_size: int = 1,
                          config: OptimizerConfig = DEFAULT_OPTIMIZER) -> MeasureResult:
    """Relative Fisher ratio after sending ``psi``, ``psi0`` and ``psi1``
    through the same channel."""
    from .dynamics import LocalChannel, QuantumChannel
    if not isinstance(channel, (QuantumChannel, LocalChannel)):
        raise ValueError("channel must be a validated QuantumChannel or LocalChannel")
    states = [channel.apply(s) for s in (sup.combined, sup.psi0, sup.psi1)]
    return _relative(*states, max_group_size, config, "rel_fisher_noisy")


def index_p(psi, max_group_size: int = 1,
            config: OptimizerConfig = DEFAULT_OPTIMIZER) -> MeasureResult:
    """``max_A V_psi(A) / n`` for pure states."""
    if not isinstance(psi, StateVector):
        raise ValueError("index p is defined for pure states only")
    res = neff_f(psi, max_group_size, config)
    var = local_mean_variance(psi, res.operator)[1]
    return MeasureResult("index_p", var / res.grouping.n,
                         {"variance": var, "grouping": str(res.grouping),
                          "operator": res.operator.to_json()},
                         {"converged": res.converged})


def double_commutator_norm(state, A) -> float:
    """``|| [A, [A, rho]] ||_1``."""
    if isinstance(state, StateVector) and isinstance(A, LocalOperator):
        # rank <= 3: lives in span{psi, A psi, A^2 psi}
        u0 = state.amplitudes
        u1 = A.apply(u0)
        u2 = A.apply(u1)
        U = np.stack([u0, u1, u2], axis=1)
        q, r = np.linalg.qr(U)
        c = np.array([[0, 0, 1], [0, -2, 0], [1, 0, 0]], dtype=complex)
        sub = r @ c @ r.conj().T
        return float(np.sum(np.abs(np.linalg.eigvalsh(0.5 * (sub + sub.conj().T)))))
    rho = as_density(state).matrix
    a = A.to_matrix() if isinstance(A, LocalOperator) else np.asarray(A)
    inner = a @ rho - rho @ a
    return trace_norm(a @ inner - inner @ a)


def index_q(rho, A) -> float:
    return double_commutator_norm(rho, A)


def index_q_scan(state, max_group_size: int = 1,
                 config: OptimizerConfig = DEFAULT_OPTIMIZER) -> MeasureResult:
    """Largest ``||[A,[A,rho]]||_1`` over the Fisher witnesses of every default
    grouping and the three collective Pauli operators.  Heuristic: no
    global maximization is attempted.  ``neff`` is normalized as
    ``value / (4 n)`` so that GHZ gives ``N``."""
    from .fisher import maximize_qfi
    n = state.num_qubits
    cands = [(collective_pauli(n, a), f"collective_{a}") for a in "xyz"]
    cache = {}
    for g in default_groupings(n, max_group_size):
        cands.append((maximize_qfi(state, g, config, _cache=cache).operator, str(g)))
    best = None
    for op, label in cands:
        v = double_commutator_norm(state, op)
        score = v / (4 * op.grouping.n)
        if best is None or score > best[0]:
            best = (score, v, op, label)
    score, v, op, label = best
    return MeasureResult("index_q", score, {"trace_norm": v, "source": label,
                                            "operator": op.to_json()}, {})


# ---------------------------------------------------------------------------
# Bjork-Mana


def _reduced_pure(psi: StateVector, group) -> np.ndarray:
    m = group_matrix(psi.amplitudes, [q - 1 for q in group], psi.num_qubits)
    return m @ m.conj().T


def distinguishability_numerator(sup: Superposition, grouping: Grouping) -> float:
    """``max_A |<A>_0 - <A>_1|`` over unit-norm local ``A`` on ``grouping``:
    the sum of group-wise trace norms of the reduced-state differences."""
    return float(sum(trace_norm(_reduced_pure(sup.psi0, g) - _reduced_pure(sup.psi1, g))
                     for g in grouping.groups))


def _spread_max(K0, K1, grouping, config, weights=(0.0, 0.25, 0.5, 0.75, 1.0), refine=3):
    """Heuristic ``max_A (sqrt V0 + sqrt V1)^2``: maximize ``w V0 + (1-w) V1``
    over a sweep of weights, then iterate the stationarity weight
    ``w = sqrt V1 / (sqrt V0 + sqrt V1)``."""
    best = (-1.0, None)

    def score(x):
        return (math.sqrt(max(x @ K0 @ x, 0.0)) + math.sqrt(max(x @ K1 @ x, 0.0))) ** 2

    for w in weights:
        _, x, _, _, _, _ = maximize_form(w * K0 + (1 - w) * K1, grouping, config)
        s = score(x)
        if s > best[0]:
            best = (s, x)
    x = best[1]
    for _ in range(refine):
        r0, r1 = math.sqrt(max(x @ K0 @ x, 0.0)), math.sqrt(max(x @ K1 @ x, 0.0))
        if r0 + r1 == 0:
            break
        w = r1 / (r0 + r1)
        _, y, _, _, _, _ = maximize_form(w * K0 + (1 - w) * K1, grouping, config)
        s = score(y)
        if s <= best[0] * (1 + 1e-12):
            break
        best = (s, y)
        x = y
    return best[0]


BM_CONFIG = OptimizerConfig(random_starts=2, rtol=1e-7)


def bjork_mana_approx(sup: Superposition, max_group_size: int = 1,
                      config: OptimizerConfig = BM_CONFIG) -> MeasureResult:
    """``(max_A |<A>_0 - <A>_1|)^2 / (max_A (sqrt V0 + sqrt V1))^2`` with
    numerator and denominator maximized separately, per grouping; the
    largest ratio over the default groupings is returned.  The numerator is
    exact, the denominator a heuristic maximum (so the ratio is an upper
    estimate when the heuristic falls short)."""
    n = sup.num_qubits
    c0, c1 = {}, {}
    best = None
    for g in default_groupings(n, max_group_size):
        num = distinguishability_numerator(sup, g) ** 2
        K0, K1 = group_gram(sup.psi0, g, c0), group_gram(sup.psi1, g, c1)
        den = _spread_max(K0, K1, g, config)
        if den < 1e-12:
            ratio = math.inf if num > 0 else 0.0
        else:
            ratio = num / den
        if best is None or ratio > best[0]:
            best = (ratio, num, den, g)
    ratio, num, den, g = best
    return MeasureResult("bjork_mana", ratio,
                         {"numerator": num, "denominator": den, "grouping": str(g)},
                         {"denominator": "heuristic"})


def orthogonalization_time(psi: StateVector, H, t_max: float, dt: float,
                           tol: float = 1e-9, zero: float = 1e-6) -> float | None:
    """First ``t`` with ``<psi|exp(-iHt)|psi> = 0``, or ``None``.

    The amplitude modulus is scanned on a grid; every grid local minimum
    is refined by bounded minimization to ``tol`` and accepted when the
    modulus there is below ``zero``.
    """
    from scipy.optimize import minimize_scalar
    from .dynamics import evolve

    def amp(t):
        return abs(np.vdot(psi.amplitudes, evolve(psi, H, t).amplitudes))

    ts = np.arange(0.0, t_max + dt, dt)
    vals = np.array([amp(t) for t in ts])
    for i in range(1, len(ts)):
        left = vals[i - 1]
        right = vals[i + 1] if i + 1 < len(ts) else math.inf
        if vals[i] <= left and vals[i] <= right:
            lo, hi = ts[i - 1], ts[min(i + 1, len(ts) - 1)]
            res = minimize_scalar(amp, bounds=(lo, hi), method="bounded",
                                  options={"xatol": tol})
            if res.fun <= zero:
                return float(res.x)
    return None


def bjork_mana_exact(sup: Superposition, H, t_max: float = 2 * math.pi,
                     dt: float = 0.01) -> MeasureResult:
    """``((theta_0 + theta_1) / theta_psi)^2`` from orthogonalization times."""
    from .fisher import qfi_any
    thetas = {}
    for label, state in (("psi", sup.combined), ("psi0", sup.psi0), ("psi1", sup.psi1)):
        if qfi_any(state, H) / 4 <= 1e-10:
            raise MeasureUndefined(f"{label} is an eigenstate of H")
        th = orthogonalization_time(state, H, t_max, dt)
        if th is None:
            raise MeasureUndefined(f"{label} does not orthogonalize within t_max={t_max}")
        thetas[label] = th
    value = ((thetas["psi0"] + thetas["psi1"]) / thetas["psi"]) ** 2
    return MeasureResult("bjork_mana_exact", value, {"theta": thetas}, {})


# ---------------------------------------------------------------------------
# Korsbakken


def _passes(sup, group, threshold):
    return reduced_trace_distance(sup.psi0, sup.psi1, group) >= threshold - 1e-12


def _greedy_partition(sup, threshold):
    n = sup.num_qubits
    groups, current = [], []
    for q in range(1, n + 1):
        current.append(q)
        if _passes(sup, current, threshold):
            groups.append(current)
            current = []
    if current:
        # leftover qubits join earlier groups until the merged group passes
        while groups:
            current = groups.pop() + current
            if _passes(sup, current, threshold):
                groups.append(current)
                current = []
                break
        if current:
            return []
    return groups


def _exhaustive_partition(sup, threshold):
    n = sup.num_qubits
    full = (1 << n) - 1
    passing = {}
    for mask in range(1, full + 1):
        group = [q + 1 for q in range(n) if mask >> q & 1]
        passing[mask] = _passes(sup, group, threshold)
    best = {0: (0, ())}
    for mask in range(1, full + 1):
        low = mask & -mask
        rest = mask ^ low
        result = (-1, ())
        sub = rest
        while True:
            part = sub | low
            if passing[part] and best[mask ^ part][0] >= 0:
                cand = best[mask ^ part][0] + 1
                if cand > result[0]:
                    result = (cand, best[mask ^ part][1] + (part,))
            if sub == 0:
                break
            sub = (sub - 1) & rest
        best[mask] = result
    count, parts = best[full]
    if count <= 0:
        return []
    return [[q + 1 for q in range(n) if p >> q & 1] for p in parts]


def korsbakken(sup: Superposition, delta: float, search: str = "auto") -> MeasureResult:
    """Largest number of groups in a partition where every group alone
    distinguishes the branches, ``T(rho0^g, rho1^g) >= 1 - 2 delta``.

    ``search`` is ``greedy``, ``exhaustive`` (N <= 8) or ``auto`` (both when
    N <= 8)."""
    if not 0 < delta < 0.5:
        raise ValueError("delta must lie in (0, 1/2)")
    n = sup.num_qubits
    if abs(sup.overlap) > 0.1:
        warnings.warn(f"branches overlap by {abs(sup.overlap):.3g}")
    threshold = 1.0 - 2.0 * delta
    found = {}
    if search in ("auto", "greedy"):
        found["greedy"] = _greedy_partition(sup, threshold)
    if search == "exhaustive" or (search == "auto" and n <= 8):
        if n > 8:
            raise ValueError("exhaustive partition search is limited to N <= 8")
        found["exhaustive"] = _exhaustive_partition(sup, threshold)
    method, groups = max(found.items(), key=lambda kv: len(kv[1]))
    diag = {"delta": delta, "search": method,
            "counts": {k: len(v) for k, v in found.items()}}
    if not groups:
        diag["note"] = "no partition with every group passing"
    return MeasureResult("korsbakken", float(len(groups)),
                         {"partition": "|".join(",".join(map(str, g)) for g in groups)
                          if groups else "", "delta": delta}, diag)


def korsbakken_delta_bound(sup: Superposition, A: LocalOperator,
                           variance_floor: float = 1e-12) -> float:
    """``Delta^2`` with ``Delta = |<A>_0 - <A>_1| / (sqrt V0 + sqrt V1)``.

    Both variances are floored at ``variance_floor`` so eigenstate branches
    give a large finite value; equal means on eigenstates are singular.
    """
    m0, v0 = local_mean_variance(sup.psi0, A)
    m1, v1 = local_mean_variance(sup.psi1, A)
    gap = abs(m0 - m1)
    den = math.sqrt(max(v0, variance_floor)) + math.sqrt(max(v1, variance_floor))
    if gap < 1e-12 and max(v0, v1) < variance_floor:
        raise SingularMeasure("both branches are eigenstates with equal mean")
    return (gap / den) ** 2


# ---------------------------------------------------------------------------
# Marquardt


def local_spectra_match(psi0: StateVector, psi1: StateVector, max_size: int = 2,
                        tol: float = 1e-8) -> bool:
    """Necessary test for ``psi1 = U_1 x ... x U_n psi0`` with small blocks:
    the spectra of all contiguous (cyclic) reductions up to ``max_size``
    qubits must agree."""
    n = psi0.num_qubits
    for size in range(1, min(max_size, n) + 1):
        for start in range(n):
            group = [(start + i) % n + 1 for i in range(size)]
            s0 = np.linalg.eigvalsh(_reduced_pure(psi0, group))
            s1 = np.linalg.eigvalsh(_reduced_pure(psi1, group))
            if np.max(np.abs(s0 - s1)) > tol:
                return False
    return True


def marquardt(sup: Superposition, direction: str = "both") -> MeasureResult:
    """Mean layer index of one branch in the layers grown from the other.

    ``direction`` ``"forward"`` grows from ``psi0``, ``"reverse"`` from
    ``psi1``; ``"both"`` reports both, uses the forward value and marks the
    result undefined when the two differ by more than a factor 2 and the
    branches fail the local-spectrum test."""
    out = {}
    if direction in ("forward", "both"):
        out["forward"] = layer_decomposition(sup.psi0, sup.psi1)
    if direction in ("reverse", "both"):
        out["reverse"] = layer_decomposition(sup.psi1, sup.psi0)
    if not out:
        raise ValueError("direction must be forward, reverse or both")
    witness = {k: {"mean": d.mean, "weights": [float(w) for w in d.weights],
                   "method": d.method} for k, d in out.items()}
    undefined = False
    diag = {}
    if direction == "both":
        f, r = out["forward"].mean, out["reverse"].mean
        related = local_spectra_match(sup.psi0, sup.psi1)
        ratio = max(f, r) / max(min(f, r), 1e-300)
        undefined = ratio > 2 and not related
        diag = {"local_spectra_match": related, "direction_ratio": ratio}
    value = out["forward"].mean if "forward" in out else out["reverse"].mean
    return MeasureResult("marquardt", value, witness, diag, undefined)
