"""Independent reference computations used by the tests.

Nothing here calls the optimizer in ``macroscopicity.fisher``; the QFI is
rebuilt from the dense spectral formula.
"""
import itertools
import math

import numpy as np
from scipy.optimize import minimize

PAULI = [np.array([[0, 1], [1, 0]], complex), np.array([[0, -1j], [1j, 0]], complex),
         np.array([[1, 0], [0, -1]], complex)]


def embed(op, q, n):
    return np.kron(np.kron(np.eye(2 ** q), op), np.eye(2 ** (n - q - 1)))


def dense_qfi(rho, a):
    p, v = np.linalg.eigh(rho)
    b = v.conj().T @ a @ v
    s = p[:, None] + p[None, :]
    d = (p[:, None] - p[None, :]) ** 2
    w = np.where(s > 1e-12, 2 * d / np.where(s > 1e-12, s, 1), 0.0)
    return float(np.sum(w * np.abs(b) ** 2))


def qfi_form(rho, n):
    """``G`` with ``F(sum_i n_i . sigma_i) = x^T G x``, ``x`` stacking the ``n_i``."""
    p, v = np.linalg.eigh(rho)
    s = p[:, None] + p[None, :]
    d = (p[:, None] - p[None, :]) ** 2
    w = np.where(s > 1e-12, 2 * d / np.where(s > 1e-12, s, 1), 0.0)
    mats = [v.conj().T @ embed(PAULI[a], q, n) @ v for q in range(n) for a in range(3)]
    g = np.empty((3 * n, 3 * n))
    for i, j in itertools.combinations_with_replacement(range(3 * n), 2):
        g[i, j] = g[j, i] = np.sum(w * (mats[i] * mats[j].conj()).real)
    return g


def grid_directions(step_deg=5.0):
    th = np.deg2rad(np.arange(0, 180 + 1e-9, step_deg))
    ph = np.deg2rad(np.arange(0, 360, step_deg))
    dirs = [(0.0, 0.0), (math.pi, 0.0)]
    dirs += [(t, f) for t in th[1:-1] for f in ph]
    return np.array(dirs)


def _vec(angles):
    t, f = angles[..., 0], angles[..., 1]
    return np.stack([np.sin(t) * np.cos(f), np.sin(t) * np.sin(f), np.cos(t)], axis=-1)


def brute_force_singleton_qfi(rho, n, step_deg=5.0, samples=20000, refine=12, seed=0):
    """Max of ``F(rho, sum_i n_i . sigma_i)`` over Bloch directions.

    The angle grid is enumerated exhaustively for ``n <= 2`` and sampled
    uniformly (``samples`` joint grid points) otherwise; the ``refine`` best
    grid points are then polished by L-BFGS over all angles.
    """
    g = qfi_form(rho, n)
    ang = grid_directions(step_deg)
    dirs = _vec(ang)
    m = len(dirs)
    blocks = [[g[3 * i:3 * i + 3, 3 * j:3 * j + 3] for j in range(n)] for i in range(n)]
    if n == 1:
        vals = np.einsum("ai,ij,aj->a", dirs, blocks[0][0], dirs)
        idx = [np.array([a]) for a in np.argsort(vals)[::-1][:refine]]
    elif n == 2:
        t = [[dirs @ blocks[i][j] @ dirs.T for j in range(2)] for i in range(2)]
        vals = np.diag(t[0][0])[:, None] + np.diag(t[1][1])[None, :] + 2 * t[0][1]
        flat = np.argsort(vals, axis=None)[::-1][:refine]
        idx = [np.array(np.unravel_index(k, vals.shape)) for k in flat]
    else:
        rng = np.random.default_rng(seed)
        picks = rng.integers(0, m, size=(samples, n))
        x = dirs[picks].reshape(samples, 3 * n)
        vals = np.einsum("si,ij,sj->s", x, g, x)
        idx = [picks[k] for k in np.argsort(vals)[::-1][:refine]]

    def neg(flat):
        x = _vec(flat.reshape(n, 2)).reshape(-1)
        return -float(x @ g @ x)

    best = -np.inf
    for choice in idx:
        res = minimize(neg, ang[choice].reshape(-1), method="L-BFGS-B")
        best = max(best, -res.fun, -neg(ang[choice].reshape(-1)))
    return best


def helstrom_error(rho0, rho1):
    """Minimum error probability for equal priors."""
    d = np.linalg.eigvalsh(rho0 - rho1)
    return 0.5 * (1 - 0.5 * np.sum(np.abs(d)))
