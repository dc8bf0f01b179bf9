"""Predict Dirichlet eigenfrequencies and boundary eigenfunctions from NtD eigenpairs."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import BoundaryNodes, arclength_derivative, laplace_beltrami

K_ESTIMATORS = ("linear", "riccati")
F_ESTIMATORS = ("trivial", "linear", "quadratic")


@dataclass(eq=False)
class ModeEstimate:
    khat: float
    fhat: np.ndarray
    source: object          # NtdEigenpair
    k_estimator: str
    f_estimator: str
    riccati_fallback: bool = False
    N: int = 0

    @property
    def kstar(self) -> float:
        return self.source.kstar


def _omega(nodes):
    return nodes.w / nodes.xn


def khat_linear(kstar: float, beta: float) -> float:
    if not beta > -1:
        raise ValueError(f"linear estimator needs beta > -1, got {beta}")
    return kstar / (1.0 + beta)


def riccati_coefficients(kstar: float, beta: float, f: np.ndarray, nodes: BoundaryNodes,
                         kz: float | None = None):
    """A = kz^2 ||xn f||^2 - ||xn f_s||^2 and B = -<f, m f>, all in the weighted norm."""
    if kz is None:
        kz = 0.5 * (1.0 + 1.0 / (1.0 + beta)) * kstar
    fs = arclength_derivative(f, nodes)
    # ||xn g||^2 = sum w xn |g|^2 under the 1/xn weight
    A = kz * kz * np.sum(nodes.w * nodes.xn * np.abs(f) ** 2) \
        - np.sum(nodes.w * nodes.xn * np.abs(fs) ** 2)
    B = -np.sum(_omega(nodes) * nodes.m * np.abs(f) ** 2)
    return float(A), float(B)


def khat_riccati_from_ab(kstar: float, beta: float, A: float, B: float):
    mu2 = A - 0.25 * B * B
    if not mu2 > 0:
        return khat_linear(kstar, beta), True
    # exact solution of k dbeta/dk = 1 + A beta^2 + B beta through (kstar, beta), evaluated at beta = 0
    mu = math.sqrt(mu2)
    c = 0.5 * B / mu
    return kstar * math.exp((math.atan(c) - math.atan(c + A * beta / mu)) / mu), False


def khat_riccati(kstar: float, beta: float, f: np.ndarray, nodes: BoundaryNodes,
                 kz: float | None = None):
    """Closed-form solution of the frozen-coefficient Riccati flow; returns (khat, fallback)."""
    if not beta > -1:
        raise ValueError(f"Riccati estimator needs beta > -1, got {beta}")
    A, B = riccati_coefficients(kstar, beta, f, nodes, kz)
    return khat_riccati_from_ab(kstar, beta, A, B)


class DOperator:
    """D g = (x.t) g_s + m g - (1/2)<m f, f> g, with f the eigenfunction fixing the constant."""

    def __init__(self, f: np.ndarray, nodes: BoundaryNodes):
        self.nodes = nodes
        self.shift = 0.5 * float(np.sum(_omega(nodes) * nodes.m * np.abs(f) ** 2))

    def __call__(self, g: np.ndarray) -> np.ndarray:
        n = self.nodes
        return n.xt * arclength_derivative(g, n) + (n.m - self.shift) * g


def d_operator(f: np.ndarray, nodes: BoundaryNodes) -> np.ndarray:
    return DOperator(f, nodes)(f)


def _normalize(g, nodes):
    return g / math.sqrt(float(np.sum(np.abs(g) ** 2 * _omega(nodes))))


def fhat(kind: str, f: np.ndarray, kstar: float, khat: float, nodes: BoundaryNodes) -> np.ndarray:
    if kind not in F_ESTIMATORS:
        raise ValueError(f"f estimator must be one of {F_ESTIMATORS}")
    e = khat - kstar
    if kind == "trivial" or e == 0:
        # f is already unit-normalized; returned untouched so eps_hat = 0 is exact
        return np.array(f, copy=True)
    D = DOperator(f, nodes)
    Df = D(f)
    out = f + (e / kstar) * Df
    if kind == "quadratic":
        second = D(Df) + Df + nodes.xn ** 2 * (laplace_beltrami(f, nodes) + kstar * kstar * f)
        out = out + (e * e / (2.0 * kstar * kstar)) * second
    return _normalize(out, nodes)


def estimate(pair, nodes: BoundaryNodes, k_estimator: str = "riccati",
             f_estimator: str = "quadratic") -> ModeEstimate:
    if k_estimator == "linear":
        k, fallback = khat_linear(pair.kstar, pair.beta), False
    elif k_estimator == "riccati":
        k, fallback = khat_riccati(pair.kstar, pair.beta, pair.f, nodes)
    else:
        raise ValueError(f"k estimator must be one of {K_ESTIMATORS}")
    fv = fhat(f_estimator, pair.f, pair.kstar, k, nodes)
    return ModeEstimate(k, fv, pair, k_estimator, f_estimator, fallback, nodes.N)
