"""Build states and branch pairs from :class:`StateSpec` values."""
from __future__ import annotations

import math

from . import states as st
from .measures import Superposition
from .states import StateSpec

LOGICAL_BLOCKS = {
    "bell": st.BELL_LOGICAL,
    "rep": (st.basis_state("00"), st.basis_state("11")),
    "bit": (st.basis_state("0"), st.basis_state("1")),
}

# families that come with two branches
SUPERPOSITION_FAMILIES = ("ghz", "gen_ghz", "logical_ghz", "cluster_ghz", "ps_domain_wall",
                          "quantum_classical", "cloned")

# the six rows of the comparison table, with the parameters used for them
TABLE_ROWS = (
    ("GHZ", "ghz"),
    ("gen. GHZ", "gen_ghz:eps=0.7853981633974483"),
    ("Cluster-GHZ", "cluster_ghz"),
    ("PS+Domain Wall", "ps_domain_wall"),
    ("Quantum/Classical", "quantum_classical"),
    ("Cloned superposition", "cloned"),
)


def _spec(spec) -> StateSpec:
    spec = StateSpec.parse(spec) if isinstance(spec, str) else spec
    if spec.num_qubits is None:
        raise ValueError(f"state spec {spec} has no qubit count")
    return spec


def _logical(spec: StateSpec):
    name = spec.params.get("block", "bell")
    if name not in LOGICAL_BLOCKS:
        raise ValueError(f"unknown logical block {name!r}; known: {', '.join(LOGICAL_BLOCKS)}")
    zero, one = LOGICAL_BLOCKS[name]
    m = zero.num_qubits
    if spec.num_qubits % m:
        raise ValueError(f"logical_ghz with {name} blocks needs N divisible by {m}")
    return spec.num_qubits // m, zero, one


def build_superposition(spec) -> Superposition:
    """Branches ``psi0, psi1`` for a two-branch family."""
    spec = _spec(spec)
    n, p, fam = spec.num_qubits, spec.params, spec.family
    st.check_capacity(n)
    if fam == "ghz":
        b0, b1 = st.basis_state("0" * n), st.basis_state("1" * n)
    elif fam == "gen_ghz":
        b0, b1 = st.generalized_ghz_branches(n, float(p.get("eps", math.pi / 4)))
    elif fam == "logical_ghz":
        b0, b1 = st.logical_ghz_branches(*_logical(spec))
    elif fam == "cluster_ghz":
        if n % 3 or n < 6:
            raise ValueError("cluster_ghz needs N divisible by 3 and N >= 6")
        b0, b1 = st.cluster_1d(n, +1), st.cluster_1d(n, -1)
    elif fam == "ps_domain_wall":
        b0, b1 = st.basis_state("0" * n), st.domain_wall(n)
    elif fam == "quantum_classical":
        _, b0, b1 = st.quantum_classical(n)
    elif fam == "cloned":
        _, b0, b1 = st.cloned_superposition(n)
    else:
        raise ValueError(f"{fam} is not a two-branch family; "
                         f"two-branch families: {', '.join(SUPERPOSITION_FAMILIES)}")
    return Superposition(b0, b1, str(spec))


def build_state(spec):
    """The state named by ``spec`` (the combined state for two-branch families)."""
    spec = _spec(spec)
    n, p, fam = spec.num_qubits, spec.params, spec.family
    st.check_capacity(n)
    if fam == "ghz":
        return st.ghz(n)
    if fam == "gen_ghz":
        return st.generalized_ghz(n, float(p.get("eps", math.pi / 4)))
    if fam == "logical_ghz":
        return st.logical_ghz(*_logical(spec))
    if fam == "w":
        return st.w_state(n)
    if fam == "dicke":
        return st.dicke(n, int(p.get("x", n // 2)))
    if fam == "cluster":
        return st.cluster_1d(n, int(p.get("sign", 1)))
    if fam == "cluster_ghz":
        return st.cluster_ghz(n)
    if fam == "domain_wall":
        return st.domain_wall(n)
    if fam == "product_plus":
        return st.product_plus(n)
    if fam == "singlet_pairs":
        return st.singlet_pairs(n)
    if fam == "ghz_mixture":
        return st.incoherent_ghz_mixture(n)
    if fam in SUPERPOSITION_FAMILIES:
        return build_superposition(spec).combined
    raise ValueError(f"unknown state family {fam!r}")


def valid_sizes(family_spec, lo: int = 1, hi: int | None = None) -> list:
    """Qubit counts in ``[lo, hi]`` accepted by the family (``hi`` defaults to the cap)."""
    from .config import max_qubits
    spec = StateSpec.parse(family_spec) if isinstance(family_spec, str) else family_spec
    hi = max_qubits() if hi is None else hi
    ok = []
    for n in range(lo, hi + 1):
        fam = spec.family
        if fam in ("singlet_pairs", "quantum_classical") and n % 2:
            continue
        if fam == "cloned" and n % 2 == 0:
            continue
        if fam == "cluster_ghz" and (n % 3 or n < 6):
            continue
        if fam == "cluster" and n < 3:
            continue
        if fam == "logical_ghz":
            block = LOGICAL_BLOCKS.get(spec.params.get("block", "bell"), st.BELL_LOGICAL)
            if n % block[0].num_qubits:
                continue
        ok.append(n)
    return ok

