"""Jordan algebra and Nesterov-Todd scaling on products of symmetric cones.

The cone is a nonnegative orthant followed by second-order cones
``Q = {(u0, u1) : u0 >= ||u1||}``. All functions operate blockwise
according to a :class:`ConeDims` layout.
"""

from dataclasses import dataclass

import numpy as np

from mimo_power.domain.entities.cone_program import ConeDims


def identity(dims: ConeDims) -> np.ndarray:
    """Identity element e of the cone."""
    e = np.zeros(dims.total)
    for kind, rows in dims.blocks():
        if kind == "l":
            e[rows] = 1.0
        else:
            e[rows.start] = 1.0
    return e


def _soc_det(u: np.ndarray) -> float:
    norm = np.linalg.norm(u[1:])
    return (u[0] - norm) * (u[0] + norm)


def min_eigenvalue(u: np.ndarray, dims: ConeDims) -> float:
    """Smallest spectral value of u; positive iff u is interior."""
    smallest = np.inf
    for kind, rows in dims.blocks():
        block = u[rows]
        if kind == "l":
            smallest = min(smallest, float(block.min()))
        else:
            smallest = min(smallest, float(block[0] - np.linalg.norm(block[1:])))
    return float(smallest)


def shift_into_cone(u: np.ndarray, dims: ConeDims) -> np.ndarray:
    """Move u into the interior along e if it is not already interior."""
    alpha = -min_eigenvalue(u, dims)
    if alpha < 0:
        return u
    return u + (1.0 + alpha) * identity(dims)


def jordan_product(u: np.ndarray, v: np.ndarray, dims: ConeDims) -> np.ndarray:
    """Jordan product u o v; elementwise on the orthant, (u^T v, u0 v1 + v0 u1) on a SOC."""
    out = np.empty(dims.total)
    for kind, rows in dims.blocks():
        a, b = u[rows], v[rows]
        if kind == "l":
            out[rows] = a * b
        else:
            out[rows.start] = a @ b
            out[rows.start + 1:rows.stop] = a[0] * b[1:] + b[0] * a[1:]
    return out


def jordan_divide(lmbda: np.ndarray, w: np.ndarray, dims: ConeDims) -> np.ndarray:
    """Solve ``lmbda o x = w`` for x, with lmbda interior."""
    out = np.empty(dims.total)
    for kind, rows in dims.blocks():
        lb, wb = lmbda[rows], w[rows]
        if kind == "l":
            out[rows] = wb / lb
        else:
            det = _soc_det(lb)
            x0 = (lb[0] * wb[0] - lb[1:] @ wb[1:]) / det
            out[rows.start] = x0
            out[rows.start + 1:rows.stop] = (wb[1:] - x0 * lb[1:]) / lb[0]
    return out


def max_step(u: np.ndarray, du: np.ndarray, dims: ConeDims) -> float:
    """Largest alpha with u + alpha du in the cone, inf if unrestricted.

    u must be interior.
    """
    alpha = np.inf
    for kind, rows in dims.blocks():
        x, d = u[rows], du[rows]
        if kind == "l":
            neg = d < 0
            if np.any(neg):
                alpha = min(alpha, float(np.min(-x[neg] / d[neg])))
            continue
        a = d[0] ** 2 - d[1:] @ d[1:]
        b = x[0] * d[0] - x[1:] @ d[1:]
        c = _soc_det(x)
        if c <= 0:
            return 0.0
        if a >= 0 and d[0] >= 0:
            continue
        disc = max(b * b - a * c, 0.0)
        denominator = -b + np.sqrt(disc)
        if denominator > 0:
            alpha = min(alpha, float(c / denominator))
    return alpha


@dataclass(frozen=True)
class NTScaling:
    """Nesterov-Todd scaling matrix W (symmetric) with ``W z = W^-1 s = lmbda``."""

    W: np.ndarray
    W_inv: np.ndarray
    lmbda: np.ndarray


def nt_scaling(s: np.ndarray, z: np.ndarray, dims: ConeDims) -> NTScaling:
    """Compute the Nesterov-Todd scaling of an interior pair (s, z)."""
    m = dims.total
    W = np.zeros((m, m))
    W_inv = np.zeros((m, m))
    for kind, rows in dims.blocks():
        sb, zb = s[rows], z[rows]
        if kind == "l":
            d = np.sqrt(sb / zb)
            W[rows, rows] = np.diag(d)
            W_inv[rows, rows] = np.diag(1.0 / d)
            continue
        s_norm = np.sqrt(_soc_det(sb))
        z_norm = np.sqrt(_soc_det(zb))
        s_bar = sb / s_norm
        z_bar = zb / z_norm
        gamma = np.sqrt((1.0 + s_bar @ z_bar) / 2.0)
        w0 = (s_bar[0] + z_bar[0]) / (2.0 * gamma)
        w1 = (s_bar[1:] - z_bar[1:]) / (2.0 * gamma)
        eta = np.sqrt(s_norm / z_norm)
        tail = np.eye(w1.size) + np.outer(w1, w1) / (1.0 + w0)
        block = np.empty((w1.size + 1, w1.size + 1))
        block[0, 0] = w0
        block[0, 1:] = w1
        block[1:, 0] = w1
        block[1:, 1:] = tail
        inverse = block.copy()
        inverse[0, 1:] = -w1
        inverse[1:, 0] = -w1
        W[rows, rows] = eta * block
        W_inv[rows, rows] = inverse / eta
    lmbda = W @ z
    return NTScaling(W=W, W_inv=W_inv, lmbda=lmbda)

