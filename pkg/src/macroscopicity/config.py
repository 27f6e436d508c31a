"""Shared numerical tolerances and the qubit capacity cap."""
from __future__ import annotations

import os
from dataclasses import dataclass

DEFAULT_MAX_QUBITS = 14
MAX_QUBITS_ENV = "MACRO_MAX_QUBITS"


@dataclass(frozen=True)
class Tolerances:
    construction: float = 1e-10
    decomposition: float = 1e-8
    rank_cutoff: float = 1e-12
    marquardt_rank: float = 1e-9


TOL = Tolerances()


def max_qubits() -> int:
    """Capacity cap, read from ``MACRO_MAX_QUBITS`` on every call."""
    raw = os.environ.get(MAX_QUBITS_ENV)
    if raw is None or raw.strip() == "":
        return DEFAULT_MAX_QUBITS
    value = int(raw)
    if value < 1:
        raise ValueError(f"{MAX_QUBITS_ENV} must be positive, got {raw!r}")
    return value


class CapacityError(RuntimeError):
    """Raised when a dense object would exceed the configured qubit cap."""


def check_capacity(num_qubits: int) -> None:
    cap = max_qubits()
    if num_qubits > cap:
        raise CapacityError(
            f"{num_qubits} qubits exceeds the capacity cap of {cap} "
            f"(set {MAX_QUBITS_ENV} to raise it)"
        )
