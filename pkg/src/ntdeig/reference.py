"""Root-search reference solver: near-zeros of the smallest singular value of 1/2 - D^t(k).

The smallest singular value t1(k) is a chain of V-shapes touching zero at
Dirichlet eigenfrequencies. It is sampled on a grid finer than the mean
level spacing; each local minimum is refined by successive parabola fits
to t1^2, or re-scanned on a finer grid when the second singular value is
also small (a possible close or degenerate pair).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .geometry import BoundaryNodes
from .layerops import assemble

log = logging.getLogger(__name__)


@dataclass
class SingularProbe:
    k: float
    t: np.ndarray            # p smallest singular values, ascending
    V: np.ndarray | None = None

    @property
    def t1(self) -> float:
        return float(self.t[0])

    @property
    def t2(self) -> float:
        return float(self.t[1])


@dataclass
class ReferenceConfig:
    tol: float = 1e-12
    maxslope: float = 1.5
    grid_factor: float = 0.2       # grid spacing in units of the Weyl mean spacing
    refine_ratio: int = 3
    max_iter: int = 60
    accept_factor: float = 10.0    # accept if t1 at vertex < maxslope * tol * accept_factor
    p: int = 4
    floor: float | None = None     # smallest recursion spacing; default max(100 tol, 1e-10)

    @property
    def h_floor(self) -> float:
        return self.floor if self.floor is not None else max(100.0 * self.tol, 1e-10)


@dataclass
class ReferenceMode:
    kj: float
    multiplicity: int = 1
    dn_phi: list = field(default_factory=list)
    t1: float = float("nan")
    suspect: bool = False
    uncertain: bool = False
    evaluations: int = 0


def _matrix(k: float, nodes: BoundaryNodes) -> np.ndarray:
    A = -assemble("Dt", k, nodes).entries
    A[np.diag_indices_from(A)] += 0.5
    return A


def min_singvals(k: float, nodes: BoundaryNodes, p: int = 4, vectors: bool = False) -> SingularProbe:
    """Smallest p singular values (and right singular vectors) of 1/2 - D^t(k)."""
    if not k > 0:
        raise ValueError(f"k must be positive, got {k}")
    A = _matrix(k, nodes)
    if vectors:
        _, s, vh = sla.svd(A, check_finite=False)
        V = vh[::-1][:p].conj().T
        return SingularProbe(float(k), s[::-1][:p].copy(), V)
    s = sla.svd(A, compute_uv=False, check_finite=False)
    return SingularProbe(float(k), s[::-1][:p].copy())


def weyl_spacing(nodes: BoundaryNodes, k: float) -> float:
    """Mean eigenfrequency spacing 2 pi / (area k) from the leading Weyl term."""
    return 2.0 * math.pi / (nodes.area * k)


class _Searcher:
    def __init__(self, nodes: BoundaryNodes, cfg: ReferenceConfig):
        self.nodes = nodes
        self.cfg = cfg
        self.cache: dict[float, np.ndarray] = {}

    def probe(self, k: float) -> np.ndarray:
        t = self.cache.get(k)
        if t is None:
            t = min_singvals(k, self.nodes, self.cfg.p).t
            self.cache[k] = t
        return t

    def scan(self, lo: float, hi: float, h: float, out: list, floor_hit: bool = False):
        n = max(int(round((hi - lo) / h)), 2) + 1
        ks = [lo + (hi - lo) * i / (n - 1) for i in range(n)]
        h = (hi - lo) / (n - 1)
        T = np.array([self.probe(k) for k in ks])
        t1 = T[:, 0]
        for i in range(1, n - 1):
            if not (t1[i] <= t1[i - 1] and t1[i] < t1[i + 1]):
                continue
            finer = h / self.cfg.refine_ratio
            if T[i, 1] < self.cfg.maxslope * 3.0 * h and finer >= self.cfg.h_floor:
                # a partner zero can hide under the steeper V up to ~3h away
                self.scan(ks[i] - 3.0 * h, ks[i] + 3.0 * h, finer, out)
            else:
                self.refine(ks[i - 1:i + 2], out)

    def refine(self, start: list, out: list):
        cfg = self.cfg
        pts = {k: self.probe(k)[0] ** 2 for k in start}
        converged = False
        kv, yv = min(pts.items(), key=lambda kv_: kv_[1])
        before = len(self.cache)
        for _ in range(cfg.max_iter):
            kbest = min(pts, key=pts.get)
            three = sorted(sorted(pts, key=lambda k: abs(k - kbest))[:3])
            x1, x2, x3 = three
            y1, y2, y3 = pts[x1], pts[x2], pts[x3]
            d1 = (y2 - y1) / (x2 - x1)
            d2 = (y3 - y2) / (x3 - x2)
            a = (d2 - d1) / (x3 - x1)
            span = x3 - x1
            if a > 0:
                kv = 0.5 * (x1 + x2) - d1 / (2.0 * a)
                kv = min(max(kv, x1 - span), x3 + span)
                yv = y1 + d1 * (kv - x1) + a * (kv - x1) * (kv - x2)
            else:
                # non-convex triple: bisect towards the lowest sample's closer side
                nb = x1 if pts[x1] < pts[x3] else x3
                kv = 0.5 * (kbest + nb)
                yv = pts[kbest]
            if abs(kv - kbest) < cfg.tol or kv in pts:
                converged = True
                break
            pts[kv] = self.probe(kv)[0] ** 2
        t_interp = math.sqrt(max(yv, 0.0))
        evals = len(self.cache) - before + 3
        if not converged:
            log.warning("parabola refinement did not converge near k=%.15g", kv)
            out.append(ReferenceMode(kv, 1, t1=t_interp, suspect=True, evaluations=evals))
            return
        if t_interp >= cfg.maxslope * cfg.tol * cfg.accept_factor:
            return
        t = self.probe(kv)
        thr = cfg.maxslope * 3.0 * cfg.h_floor
        mult = max(1, int(np.sum(t < thr)))
        out.append(ReferenceMode(kv, mult, t1=t_interp, evaluations=evals))


def find_eigenfrequencies(k_lo: float, k_hi: float, nodes: BoundaryNodes,
                          cfg: ReferenceConfig | None = None) -> tuple[list, int]:
    """Eigenfrequencies in [k_lo, k_hi); returns (modes without boundary data, probe count)."""
    cfg = cfg or ReferenceConfig()
    if cfg.tol < 1e-13:
        raise ValueError("tol below 1e-13 is not attainable in double precision")
    if not cfg.maxslope > 0:
        raise ValueError("maxslope must be positive")
    if k_hi <= k_lo:
        return [], 0
    h = cfg.grid_factor * weyl_spacing(nodes, 0.5 * (k_lo + k_hi))
    searcher = _Searcher(nodes, cfg)
    found: list = []
    searcher.scan(k_lo - 2 * h, k_hi + 2 * h, h, found)
    found.sort(key=lambda m: m.kj)
    merged: list = []
    for m in found:
        if merged and abs(m.kj - merged[-1].kj) < cfg.h_floor:
            prev = merged[-1]
            if (m.multiplicity, -m.t1) > (prev.multiplicity, -prev.t1):
                merged[-1] = m
            continue
        merged.append(m)
    modes = [m for m in merged if k_lo <= m.kj < k_hi]
    return modes, len(searcher.cache)


def rellich_normalize(V: np.ndarray, kj: float, nodes: BoundaryNodes) -> np.ndarray:
    """Orthonormalize columns so that sum w (x.n) conj(v_a) v_b = 2 kj^2 delta_ab."""
    G = V.conj().T @ (V * (nodes.w * nodes.xn)[:, None])
    evals, evecs = np.linalg.eigh(G)
    inv_sqrt = evecs @ np.diag(1.0 / np.sqrt(evals)) @ evecs.conj().T
    return V @ inv_sqrt * (math.sqrt(2.0) * kj)


def _realify(V: np.ndarray, nodes: BoundaryNodes) -> np.ndarray:
    """Rotate each column (p=1) or the span (p>1) to real functions."""
    omega = nodes.w * nodes.xn
    p = V.shape[1]
    if p == 1:
        v = V[:, 0]
        s = np.sum(v * v * omega)
        v = (np.exp(-0.5j * np.angle(s)) * v).real
        if v[np.argmax(np.abs(v))] < 0:
            v = -v
        return v[:, None]
    sq = np.sqrt(omega)[:, None]
    M = np.hstack([(V * sq).real, (V * sq).imag])
    U, _, _ = np.linalg.svd(M, full_matrices=False)
    return U[:, :p] / sq


def extract_modes(kj: float, p: int, nodes: BoundaryNodes, cfg: ReferenceConfig | None = None) -> ReferenceMode:
    """Normal derivative data of the p-dimensional eigenspace at kj, Rellich-normalized."""
    cfg = cfg or ReferenceConfig()
    probe = min_singvals(kj, nodes, max(p + 1, cfg.p), vectors=True)
    V = _realify(probe.V[:, :p], nodes)
    V = rellich_normalize(V, kj, nodes).real
    t = probe.t
    uncertain = bool(len(t) > p and t[p] < 10.0 * t[p - 1])
    if uncertain:
        log.warning("singular gap at k=%.15g is small: t_%d=%.3g, t_%d=%.3g", kj, p, t[p - 1], p + 1, t[p])
    return ReferenceMode(kj, p, [V[:, i].copy() for i in range(p)], t1=float(t[0]), uncertain=uncertain)


def solve_reference(k_lo: float, k_hi: float, nodes: BoundaryNodes,
                    cfg: ReferenceConfig | None = None, extract: bool = True):
    cfg = cfg or ReferenceConfig()
    modes, probes = find_eigenfrequencies(k_lo, k_hi, nodes, cfg)
    if extract:
        full = []
        for m in modes:
            em = extract_modes(m.kj, m.multiplicity, nodes, cfg)
            em.t1, em.suspect, em.evaluations = m.t1, m.suspect, m.evaluations
            full.append(em)
        modes = full
    return modes, probes
