"""Nystrom matrices for the Helmholtz single and double layer operators.

Kernels are split as ``K(s,t) = log(4 sin^2((s-t)/2)) K1(s,t) + K2(s,t)``;
the log part is integrated with the Martensen-Kussmaul weights and the
smooth part with the trapezoid rule. Matrices act on raw node samples.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .geometry import BoundaryNodes, BoundaryScalarField
from .specfun import EULER_GAMMA, bessel01, hankel01

KINDS = ("S", "D", "Dt")


@dataclass(frozen=True, eq=False)
class LayerMatrix:
    entries: np.ndarray
    k: float
    kind: str
    nodes: BoundaryNodes


@lru_cache(maxsize=16)
def _mk_weights_cached(N: int) -> np.ndarray:
    j = np.arange(N)
    m = np.arange(1, N // 2)
    angles = np.outer(j, m) * (2.0 * np.pi / N)
    R = -(2.0 / m * np.cos(angles)).sum(axis=1) - (2.0 / N) * np.cos(np.pi * j)
    R.setflags(write=False)
    return R


def mk_weights(N: int) -> np.ndarray:
    """Martensen-Kussmaul weights R_j = R_j^(N)(0) for the periodic log kernel."""
    if N % 2:
        raise ValueError(f"N must be even, got {N}")
    return _mk_weights_cached(N).copy()


@lru_cache(maxsize=8)
def _pair_geometry(nodes: BoundaryNodes):
    N = nodes.N
    diff = nodes.z[:, None, :] - nodes.z[None, :, :]        # z(s_i) - z(t_j)
    r = np.hypot(diff[..., 0], diff[..., 1])
    idx = np.arange(N)
    dist = np.abs(idx[:, None] - idx[None, :])
    logsin = np.zeros((N, N))
    off = ~np.eye(N, dtype=bool)
    logsin[off] = np.log(4.0 * np.sin(np.pi * dist[off] / N) ** 2)
    # n(t_j) . (z(s_i) - z(t_j)) / r for the double layer
    cosn = np.zeros((N, N))
    cosn[off] = (np.einsum("ijk,jk->ij", diff, nodes.normal)[off]) / r[off]
    weights = mk_weights(N)[dist]
    return r, logsin, cosn, weights, off


def _bessels(nodes: BoundaryNodes, k: float):
    r, _, _, _, off = _pair_geometry(nodes)
    N = nodes.N
    j0 = np.ones((N, N))
    y0 = np.zeros((N, N))
    j1 = np.zeros((N, N))
    y1 = np.zeros((N, N))
    vals = bessel01(k * r[off])
    for arr, v in zip((j0, y0, j1, y1), vals):
        arr[off] = v
    return j0, y0, j1, y1


def _single(nodes: BoundaryNodes, k: float, bes) -> np.ndarray:
    r, logsin, _, weights, off = _pair_geometry(nodes)
    j0, y0, _, _ = bes
    speed = nodes.speed[None, :]
    K = 0.25j * (j0 + 1j * y0) * speed
    K1 = -(1.0 / (4.0 * np.pi)) * j0 * speed
    K2 = K - K1 * logsin
    diag = (0.25j - EULER_GAMMA / (2.0 * np.pi)
            - np.log(0.5 * k * nodes.speed) / (2.0 * np.pi)) * nodes.speed
    np.fill_diagonal(K2, diag)
    return (2.0 * np.pi / nodes.N) * (weights * K1 + K2)


def _double(nodes: BoundaryNodes, k: float, bes) -> np.ndarray:
    r, logsin, cosn, weights, off = _pair_geometry(nodes)
    _, _, j1, y1 = bes
    speed = nodes.speed[None, :]
    K = 0.25j * k * (j1 + 1j * y1) * cosn * speed
    K1 = -(k / (4.0 * np.pi)) * j1 * cosn * speed
    K2 = K - K1 * logsin
    np.fill_diagonal(K2, -nodes.kappa * nodes.speed / (4.0 * np.pi))
    return (2.0 * np.pi / nodes.N) * (weights * K1 + K2)


def transpose_double(D: np.ndarray, nodes: BoundaryNodes) -> np.ndarray:
    """Nystrom matrix of D^t from that of D: Dt[i,j] = D[j,i] |z'_j| / |z'_i|."""
    return D.T * nodes.speed[None, :] / nodes.speed[:, None]


def assemble(kind: str, k: float, nodes: BoundaryNodes) -> LayerMatrix:
    if not k > 0:
        raise ValueError(f"wavenumber must be positive, got {k}")
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}")
    bes = _bessels(nodes, k)
    if kind == "S":
        mat = _single(nodes, k, bes)
    else:
        mat = _double(nodes, k, bes)
        if kind == "Dt":
            mat = transpose_double(mat, nodes)
    return LayerMatrix(mat, float(k), kind, nodes)


def assemble_sd(k: float, nodes: BoundaryNodes):
    """S and D at one wavenumber, sharing the Bessel evaluations."""
    if not k > 0:
        raise ValueError(f"wavenumber must be positive, got {k}")
    bes = _bessels(nodes, k)
    return (LayerMatrix(_single(nodes, k, bes), float(k), "S", nodes),
            LayerMatrix(_double(nodes, k, bes), float(k), "D", nodes))


# --- potentials evaluated off the boundary --------------------------------

def _too_close(points: np.ndarray, nodes: BoundaryNodes, margin: float) -> np.ndarray:
    theta = np.arctan2(points[:, 1], points[:, 0])
    r_bdry, _, _ = nodes.spec.radial(theta)
    return np.hypot(points[:, 0], points[:, 1]) > r_bdry - margin


def _eval_kernel(k, density, points, nodes, kind, chunk=2048):
    dens = np.asarray(density.values if isinstance(density, BoundaryScalarField) else density)
    points = np.atleast_2d(np.asarray(points, dtype=float))
    out = np.zeros((points.shape[0],) + dens.shape[1:], dtype=complex)
    for start in range(0, points.shape[0], chunk):
        p = points[start:start + chunk]
        diff = p[:, None, :] - nodes.z[None, :, :]
        r = np.hypot(diff[..., 0], diff[..., 1])
        h0, h1 = hankel01(k * r)
        if kind == "S":
            ker = 0.25j * h0
        else:
            cos_y = np.einsum("pjk,jk->pj", diff, nodes.normal) / r
            ker = 0.25j * k * h1 * cos_y
        out[start:start + chunk] = (ker * nodes.w[None, :]) @ dens
    return out


def single_layer_eval(k: float, density, points, nodes: BoundaryNodes,
                      margin_factor: float = 5.0):
    """Single-layer potential at interior points by the trapezoid rule.

    Returns ``(values, flagged)``; ``flagged`` marks points closer to the
    boundary than ``margin_factor`` node spacings, where accuracy is lost.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    flagged = _too_close(points, nodes, margin_factor * nodes.h)
    return _eval_kernel(k, density, points, nodes, "S"), flagged


def double_layer_eval(k: float, density, points, nodes: BoundaryNodes,
                      margin_factor: float = 5.0):
    points = np.atleast_2d(np.asarray(points, dtype=float))
    flagged = _too_close(points, nodes, margin_factor * nodes.h)
    return _eval_kernel(k, density, points, nodes, "D"), flagged
