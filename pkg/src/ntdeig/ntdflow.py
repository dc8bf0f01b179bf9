"""Spectrum of the weighted Neumann-to-Dirichlet operator Theta(k).

Two discretizations are provided. The Cayley scheme diagonalizes the
unitary R = K_-^{-1} K_+ with K_+- = +-(1/2 + D) + i eta S (x.n)^{-1}
and maps eigenvalues back by beta = (i/eta)(1+lambda)/(1-lambda). The
direct scheme diagonalizes (1/2 + D)^{-1} S (x.n)^{-1}, which breaks down
near Neumann eigenfrequencies and is kept for comparison only.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .geometry import BoundaryNodes
from .layerops import assemble_sd

log = logging.getLogger(__name__)

COND_LIMIT = 1e15
# negative betas closer than this are treated as one eigenspace when phase-fixing
CLUSTER_TOL = 1e-10


class SingularSystemError(RuntimeError):
    pass


@dataclass(eq=False)
class NtdEigenpair:
    beta: float
    f: np.ndarray
    lam: complex
    residual: float
    kstar: float
    beta_imag: float = 0.0
    imag_discarded: float = 0.0


@dataclass(eq=False)
class NtdSpectrum:
    kstar: float
    eta: float
    pairs: list
    scheme: str
    nodes: BoundaryNodes
    cond: float = float("nan")
    flags: dict = field(default_factory=dict)

    @property
    def betas(self) -> np.ndarray:
        return np.array([p.beta for p in self.pairs])


def cayley_to_beta(lam, eta: float):
    """beta = (i/eta)(1 + lambda)/(1 - lambda)."""
    lam = np.asarray(lam, dtype=complex)
    return (1j / eta) * (1.0 + lam) / (1.0 - lam)


def _phase_fix(v: np.ndarray, omega: np.ndarray):
    """Real unit vector from v rotated to maximize its real part; returns (f, |Im| lost)."""
    s = np.sum(v * v * omega)
    alpha = np.exp(-0.5j * np.angle(s)) if abs(s) > 0 else 1.0
    rot = alpha * v
    nrm = np.sqrt(np.sum(np.abs(rot) ** 2 * omega))
    lost = np.sqrt(np.sum(rot.imag ** 2 * omega)) / nrm
    f = rot.real
    f = f / np.sqrt(np.sum(f * f * omega))
    if f[np.argmax(np.abs(f))] < 0:
        f = -f
    return f, float(lost)


def _real_basis(V: np.ndarray, omega: np.ndarray):
    """Weighted-orthonormal real basis for the span of the complex columns of V."""
    p = V.shape[1]
    sq = np.sqrt(omega)[:, None]
    M = np.hstack([(V * sq).real, (V * sq).imag])
    U, sig, _ = np.linalg.svd(M, full_matrices=False)
    basis = U[:, :p] / sq
    lost = float(sig[p] / sig[0]) if len(sig) > p else 0.0
    for i in range(p):
        col = basis[:, i]
        if col[np.argmax(np.abs(col))] < 0:
            basis[:, i] = -col
    return basis, lost


def _eigenpairs(betas_raw, lams, V, nodes, kstar, S, D):
    omega = nodes.w / nodes.xn
    order = np.argsort(betas_raw.real, kind="stable")
    betas_raw, lams, V = betas_raw[order], lams[order], V[:, order]
    n = len(betas_raw)
    F = np.empty((nodes.N, n))
    lost = np.zeros(n)
    i = 0
    while i < n:
        j = i + 1
        b = betas_raw[i].real
        while (j < n and b < -1e-8 and betas_raw[j].real < 0
               and betas_raw[j].real - betas_raw[j - 1].real <= CLUSTER_TOL * max(1.0, abs(b))):
            j += 1
        if j - i == 1:
            F[:, i], lost[i] = _phase_fix(V[:, i], omega)
        else:
            F[:, i:j], lst = _real_basis(V[:, i:j], omega)
            lost[i:j] = lst
        i = j
    betas = betas_raw.real
    half_plus_d = 0.5 * np.eye(nodes.N) + D
    lhs = half_plus_d @ (F * betas[None, :])
    rhs = S @ (F / nodes.xn[:, None])
    res = np.linalg.norm(lhs - rhs, axis=0) / np.linalg.norm(F, axis=0)
    return [NtdEigenpair(float(betas[q]), F[:, q], complex(lams[q]), float(res[q]), float(kstar),
                         float(betas_raw[q].imag), float(lost[q])) for q in range(n)]


def ntd_spectrum_cayley(kstar: float, nodes: BoundaryNodes, eta: float | None = None) -> NtdSpectrum:
    if not kstar > 0:
        raise ValueError(f"kstar must be positive, got {kstar}")
    eta = float(kstar if eta is None else eta)
    S, D = assemble_sd(kstar, nodes)
    S, D = S.entries, D.entries
    N = nodes.N
    half_plus_d = 0.5 * np.eye(N) + D
    s_weighted = 1j * eta * S / nodes.xn[None, :]
    k_plus = half_plus_d + s_weighted
    k_minus = -half_plus_d + s_weighted
    lu, piv = sla.lu_factor(k_minus, check_finite=False)
    anorm = np.abs(k_minus).sum(axis=0).max()
    rcond, info = sla.lapack.zgecon(lu, anorm)
    cond = 1.0 / rcond if rcond > 0 else np.inf
    if cond > COND_LIMIT or info != 0:
        raise SingularSystemError(
            f"K_- is numerically singular at k*={kstar} (N={N}, eta={eta}): cond ~ {cond:.3g}")
    if cond > 1e8:
        log.warning("K_- condition estimate %.3g at k*=%g", cond, kstar)
    R = sla.lu_solve((lu, piv), k_plus, check_finite=False)
    lams, V = sla.eig(R, check_finite=False, overwrite_a=True)
    betas_raw = cayley_to_beta(lams, eta)
    pairs = _eigenpairs(betas_raw, lams, V, nodes, kstar, S, D)
    return NtdSpectrum(float(kstar), eta, pairs, "cayley", nodes, cond=float(cond))


def ntd_spectrum_direct(kstar: float, nodes: BoundaryNodes) -> NtdSpectrum:
    """Eigenpairs of (1/2 + D)^{-1} S (x.n)^{-1}; flags ill-conditioning instead of raising."""
    if not kstar > 0:
        raise ValueError(f"kstar must be positive, got {kstar}")
    S, D = assemble_sd(kstar, nodes)
    S, D = S.entries, D.entries
    half_plus_d = 0.5 * np.eye(nodes.N) + D
    cond = float(np.linalg.cond(half_plus_d))
    theta = np.linalg.solve(half_plus_d, S / nodes.xn[None, :])
    betas_raw, V = sla.eig(theta, check_finite=False, overwrite_a=True)
    finite = np.isfinite(betas_raw)
    betas_raw, V = betas_raw[finite], V[:, finite]
    lams = (1j * betas_raw - 1.0) / (1j * betas_raw + 1.0) if len(betas_raw) else betas_raw
    pairs = _eigenpairs(betas_raw, lams, V, nodes, kstar, S, D)
    flags = {"ill_conditioned": cond > 1e12}
    return NtdSpectrum(float(kstar), float("nan"), pairs, "direct", nodes, cond=cond, flags=flags)


def window_beta_range(kstar: float, eps: float):
    return -eps / (kstar + eps), 0.0


def select_window(spec: NtdSpectrum, eps: float, margin: float = 0.0) -> list:
    """Pairs whose linear estimate kstar/(1+beta) falls in [kstar, kstar + eps (1 + margin)).

    A positive margin returns extra candidates past the upper edge, for callers
    that decide membership with a more accurate estimator.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    if margin < 0:
        raise ValueError("margin must be non-negative")
    lo, hi = window_beta_range(spec.kstar, eps * (1.0 + margin))
    # strict inequality at lo keeps kstar + eps out of this window
    return [p for p in spec.pairs if lo < p.beta < hi]


def nearest_branch(spec: NtdSpectrum, target: float) -> NtdEigenpair:
    return min(spec.pairs, key=lambda p: abs(p.beta - target))


def flow_scan(spec_curve_nodes: BoundaryNodes, k_lo: float, k_hi: float, samples: int,
              beta_window: tuple = (-np.inf, np.inf)):
    """Cayley spectra on an equispaced k grid; returns (ks, list of sorted beta arrays)."""
    ks = np.linspace(k_lo, k_hi, samples)
    rows = []
    for k in ks:
        b = ntd_spectrum_cayley(float(k), spec_curve_nodes).betas
        rows.append(b[(b >= beta_window[0]) & (b <= beta_window[1])])
    return ks, rows


def crossing_slope(nodes: BoundaryNodes, kj: float, dk: float = 1e-3) -> float:
    """Central-difference d(beta)/dk of the branch through zero at kj."""
    lo = nearest_branch(ntd_spectrum_cayley(kj - dk, nodes), -dk / kj)
    hi = nearest_branch(ntd_spectrum_cayley(kj + dk, nodes), dk / kj)
    return (hi.beta - lo.beta) / (2.0 * dk)


def write_flow_csv(path, ks, rows):
    width = max((len(r) for r in rows), default=0)
    with open(path, "w") as fh:
        fh.write(",".join(["k"] + [f"beta_{i + 1}" for i in range(width)]) + "\n")
        for k, r in zip(ks, rows):
            vals = [f"{k:.17g}"] + [f"{b:.17g}" for b in r] + [""] * (width - len(r))
            fh.write(",".join(vals) + "\n")


__all__ = [
    "NtdEigenpair", "NtdSpectrum", "SingularSystemError", "cayley_to_beta",
    "ntd_spectrum_cayley", "ntd_spectrum_direct", "select_window", "flow_scan",
    "crossing_slope", "write_flow_csv", "nearest_branch",
]
