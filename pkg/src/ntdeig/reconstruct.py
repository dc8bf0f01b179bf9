"""Interior evaluation of approximate eigenfunctions and grid error norms."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import BoundaryNodes
from .layerops import single_layer_eval


@dataclass(frozen=True, eq=False)
class InteriorGrid:
    dx: float
    points: np.ndarray       # (M, 2) interior points
    inside_mask: np.ndarray  # (ny, nx) over the bounding-box lattice
    xs: np.ndarray
    ys: np.ndarray

    @property
    def area_per_point(self) -> float:
        return self.dx * self.dx


def interior_grid(nodes: BoundaryNodes, dx: float, margin_factor: float = 5.0) -> InteriorGrid:
    """Square lattice points lying at least ``margin_factor * h`` radially inside the curve."""
    if not dx > 0:
        raise ValueError("dx must be positive")
    lo = nodes.z.min(axis=0)
    hi = nodes.z.max(axis=0)
    xs = np.arange(math.floor(lo[0] / dx), math.ceil(hi[0] / dx) + 1) * dx
    ys = np.arange(math.floor(lo[1] / dx), math.ceil(hi[1] / dx) + 1) * dx
    X, Y = np.meshgrid(xs, ys)
    r_bdry, _, _ = nodes.spec.radial(np.arctan2(Y, X))
    mask = np.hypot(X, Y) < r_bdry - margin_factor * nodes.h
    pts = np.column_stack([X[mask], Y[mask]])
    return InteriorGrid(float(dx), pts, mask, xs, ys)


def eval_mode(khat: float, fhat, points, nodes: BoundaryNodes, margin_factor: float = 5.0):
    """phi(x) = sqrt(2) k S(k)[fhat / (x.n)](x); returns (values, flagged points)."""
    dens = np.asarray(fhat) / nodes.xn.reshape((-1,) + (1,) * (np.ndim(fhat) - 1))
    vals, flagged = single_layer_eval(khat, dens, points, nodes, margin_factor)
    return math.sqrt(2.0) * khat * vals, flagged


def interior_l2_error(phi_a, phi_b, area_per_point: float) -> float:
    a = np.asarray(phi_a)
    b = np.asarray(phi_b)
    if a.shape != b.shape:
        raise ValueError("samples are on different grids")
    return float(np.sqrt(np.sum(np.abs(a - b) ** 2) * area_per_point))


def interior_l2_norm(phi, area_per_point: float) -> float:
    return float(np.sqrt(np.sum(np.abs(np.asarray(phi)) ** 2) * area_per_point))


def align_phase(phi, ref):
    """Multiply phi by the unit phase best matching ref in the grid inner product."""
    s = np.vdot(phi, ref)
    return phi * (s / abs(s)) if abs(s) > 0 else phi


def intensity_image(grid: InteriorGrid, values) -> np.ndarray:
    """8-bit image, white (255) where |phi| is zero and outside the domain."""
    inten = np.abs(np.asarray(values)) ** 2
    peak = inten.max() if inten.size else 0.0
    scaled = np.zeros_like(inten) if peak == 0 else np.minimum(1.0, inten / peak)
    img = np.full(grid.inside_mask.shape, 255, dtype=np.uint8)
    img[grid.inside_mask] = (255 - np.round(255 * scaled)).astype(np.uint8)
    # rows top-down with y increasing upward
    return img[::-1]


def write_pgm(path, img: np.ndarray):
    img = np.asarray(img, dtype=np.uint8)
    h, w = img.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(img.tobytes())


def read_pgm(path) -> np.ndarray:
    with open(path, "rb") as fh:
        data = fh.read()
    tokens, pos = [], 0
    while len(tokens) < 4:
        while data[pos:pos + 1].isspace():
            pos += 1
        start = pos
        while not data[pos:pos + 1].isspace():
            pos += 1
        tokens.append(data[start:pos])
    pos += 1  # exactly one whitespace byte precedes the raster
    if tokens[0] != b"P5":
        raise ValueError("not a binary PGM file")
    w, h, maxval = int(tokens[1]), int(tokens[2]), int(tokens[3])
    if maxval != 255:
        raise ValueError("only 8-bit PGM is supported")
    return np.frombuffer(data[pos:pos + w * h], dtype=np.uint8).reshape(h, w)
