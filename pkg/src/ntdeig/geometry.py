"""Star-shaped radial curves, their equispaced discretization and boundary fields."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np


class NotStarShapedError(ValueError):
    pass


@dataclass(frozen=True)
class CurveSpec:
    """Radial curve r(theta) from one of three families.

    ``smoothstar``: r = 1 + a cos(w theta)
    ``smoothnonsym``: r = 1 + a cos(w (theta + b sin theta))
    ``circle``: r = radius
    """

    family: str
    a: float = 0.0
    b: float = 0.0
    w: int = 0
    radius: float = 1.0

    def __post_init__(self):
        if self.family not in ("smoothstar", "smoothnonsym", "circle"):
            raise ValueError(f"unknown curve family {self.family!r}")
        if self.family == "circle" and not self.radius > 0:
            raise ValueError("circle radius must be positive")

    @classmethod
    def smoothstar(cls, a: float, w: int) -> "CurveSpec":
        return cls("smoothstar", a=float(a), w=int(w))

    @classmethod
    def smoothnonsym(cls, a: float, b: float, w: int) -> "CurveSpec":
        return cls("smoothnonsym", a=float(a), b=float(b), w=int(w))

    @classmethod
    def circle(cls, radius: float = 1.0) -> "CurveSpec":
        return cls("circle", radius=float(radius))

    @classmethod
    def parse(cls, text: str) -> "CurveSpec":
        """Parse ``smoothstar:a,w``, ``smoothnonsym:a,b,w`` or ``circle:r``."""
        name, _, args = text.strip().partition(":")
        vals = [v for v in args.split(",") if v.strip()]
        try:
            if name == "smoothstar" and len(vals) == 2:
                return cls.smoothstar(float(vals[0]), _as_int(vals[1]))
            if name == "smoothnonsym" and len(vals) == 3:
                return cls.smoothnonsym(float(vals[0]), float(vals[1]), _as_int(vals[2]))
            if name == "circle" and len(vals) <= 1:
                return cls.circle(float(vals[0]) if vals else 1.0)
        except ValueError as exc:
            raise ValueError(f"bad curve spec {text!r}: {exc}") from None
        raise ValueError(
            f"bad curve spec {text!r}; expected smoothstar:a,w | smoothnonsym:a,b,w | circle:r")

    def label(self) -> str:
        if self.family == "smoothstar":
            return f"smoothstar:{self.a!r},{self.w}"
        if self.family == "smoothnonsym":
            return f"smoothnonsym:{self.a!r},{self.b!r},{self.w}"
        return f"circle:{self.radius!r}"

    def radial(self, theta):
        """Return r, r', r'' at ``theta``."""
        theta = np.asarray(theta, dtype=float)
        if self.family == "circle":
            r = np.full_like(theta, self.radius)
            return r, np.zeros_like(theta), np.zeros_like(theta)
        a, w = self.a, self.w
        if self.family == "smoothstar":
            phase = w * theta
            return 1.0 + a * np.cos(phase), -a * w * np.sin(phase), -a * w * w * np.cos(phase)
        b = self.b
        phase = w * (theta + b * np.sin(theta))
        dphase = w * (1.0 + b * np.cos(theta))
        ddphase = -w * b * np.sin(theta)
        r = 1.0 + a * np.cos(phase)
        dr = -a * np.sin(phase) * dphase
        ddr = -a * np.cos(phase) * dphase ** 2 - a * np.sin(phase) * ddphase
        return r, dr, ddr


def _as_int(text: str) -> int:
    val = float(text)
    if val != int(val):
        raise ValueError(f"expected an integer, got {text}")
    return int(val)


@dataclass(frozen=True, eq=False)
class BoundaryNodes:
    """Per-node geometry of a curve sampled at t_i = 2 pi i / N.

    Positions and derivatives are stored as (N, 2) arrays. ``w`` holds the
    trapezoid weights 2 pi |z'| / N, so ``w.sum()`` is the perimeter.
    """

    spec: CurveSpec
    N: int
    t: np.ndarray
    z: np.ndarray
    dz: np.ndarray
    ddz: np.ndarray
    speed: np.ndarray
    tangent: np.ndarray
    normal: np.ndarray
    xn: np.ndarray
    xt: np.ndarray
    kappa: np.ndarray
    w: np.ndarray
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def perimeter(self) -> float:
        return float(self.w.sum())

    @property
    def area(self) -> float:
        cross = self.z[:, 0] * self.dz[:, 1] - self.z[:, 1] * self.dz[:, 0]
        return float(0.5 * cross.sum() * 2.0 * np.pi / self.N)

    @property
    def h(self) -> float:
        """Mean node spacing (perimeter / N)."""
        return self.perimeter / self.N

    @cached_property
    def m(self) -> np.ndarray:
        return m_field(self)

    def field(self, values) -> "BoundaryScalarField":
        return BoundaryScalarField(np.asarray(values), self)


@dataclass(frozen=True, eq=False)
class BoundaryScalarField:
    values: np.ndarray
    nodes: BoundaryNodes

    def __post_init__(self):
        if self.values.shape[0] != self.nodes.N:
            raise ValueError(
                f"field has {self.values.shape[0]} samples but nodes have N={self.nodes.N}")


def discretize(spec: CurveSpec, N: int) -> BoundaryNodes:
    """Sample ``spec`` at N equispaced parameter nodes with exact derivatives."""
    if N < 16 or N % 2:
        raise ValueError(f"N must be even and >= 16, got {N}")
    t = 2.0 * np.pi * np.arange(N) / N
    r, dr, ddr = spec.radial(t)
    c, s = np.cos(t), np.sin(t)
    z = np.column_stack([r * c, r * s])
    dz = np.column_stack([dr * c - r * s, dr * s + r * c])
    ddz = np.column_stack([(ddr - r) * c - 2 * dr * s, (ddr - r) * s + 2 * dr * c])
    speed = np.hypot(dz[:, 0], dz[:, 1])
    tangent = dz / speed[:, None]
    normal = np.column_stack([tangent[:, 1], -tangent[:, 0]])
    xn = np.einsum("ij,ij->i", z, normal)
    xt = np.einsum("ij,ij->i", z, tangent)
    kappa = (dz[:, 0] * ddz[:, 1] - dz[:, 1] * ddz[:, 0]) / speed ** 3
    if xn.min() <= 0:
        raise NotStarShapedError(
            f"{spec.label()} is not star-shaped about the origin: min(x.n) = {xn.min():.6g}")
    w = 2.0 * np.pi * speed / N
    return BoundaryNodes(spec, N, t, z, dz, ddz, speed, tangent, normal, xn, xt, kappa, w)


def default_n(spec: CurveSpec, k: float, ppw: float = 6.3, minimum: int = 16) -> int:
    """Node count giving ``ppw`` points per wavelength at wavenumber k, rounded up to even."""
    perimeter = discretize(spec, 256).perimeter
    n = math.ceil(ppw * k * perimeter / (2.0 * np.pi))
    n += n % 2
    return max(n, minimum)


def _values(f):
    return f.values if isinstance(f, BoundaryScalarField) else np.asarray(f)


def spectral_derivative(f, order: int = 1):
    """Derivative d/dt (order 1) or d^2/dt^2 (order 2) of the trigonometric interpolant."""
    vals = _values(f)
    N = vals.shape[0]
    freq = np.fft.fftfreq(N, d=1.0 / N)
    if order == 1:
        mult = 1j * freq
        if N % 2 == 0:
            mult[N // 2] = 0.0
    elif order == 2:
        mult = -freq ** 2
    else:
        raise ValueError("order must be 1 or 2")
    shape = (N,) + (1,) * (vals.ndim - 1)
    out = np.fft.ifft(mult.reshape(shape) * np.fft.fft(vals, axis=0), axis=0)
    if not np.iscomplexobj(vals):
        out = out.real
    if isinstance(f, BoundaryScalarField):
        return BoundaryScalarField(out, f.nodes)
    return out


def arclength_derivative(f, nodes: BoundaryNodes | None = None):
    """d/ds = (1/|z'|) d/dt."""
    if isinstance(f, BoundaryScalarField):
        nodes = f.nodes
    vals = spectral_derivative(_values(f), 1)
    out = vals / nodes.speed.reshape((-1,) + (1,) * (vals.ndim - 1))
    return BoundaryScalarField(out, nodes) if isinstance(f, BoundaryScalarField) else out


def laplace_beltrami(f, nodes: BoundaryNodes):
    """Boundary Laplacian d^2/ds^2 applied to samples."""
    return arclength_derivative(arclength_derivative(_values(f), nodes), nodes)


def m_field(nodes: BoundaryNodes) -> np.ndarray:
    """m = (x.n) W(1/(x.n)) + div W with W = (x.t) d/ds."""
    ds_inv_xn = arclength_derivative(1.0 / nodes.xn, nodes)
    div_w = arclength_derivative(nodes.xt, nodes)
    return nodes.xn * nodes.xt * ds_inv_xn + div_w


def weighted_inner_product(f, g, nodes: BoundaryNodes | None = None) -> complex:
    """Sum of conj(f) g w / (x.n); the boundary inner product with weight 1/(x.n)."""
    if isinstance(f, BoundaryScalarField) and isinstance(g, BoundaryScalarField):
        if f.nodes is not g.nodes:
            raise ValueError("fields live on different node sets")
    nodes = nodes or getattr(f, "nodes", None) or getattr(g, "nodes", None)
    if nodes is None:
        raise ValueError("nodes required for raw arrays")
    fv, gv = _values(f), _values(g)
    if fv.shape[0] != nodes.N or gv.shape[0] != nodes.N:
        raise ValueError("field length does not match N")
    return complex(np.sum(np.conj(fv) * gv * (nodes.w / nodes.xn)))


def weighted_norm(f, nodes: BoundaryNodes) -> float:
    vals = _values(f)
    return float(np.sqrt(np.sum(np.abs(vals) ** 2 * (nodes.w / nodes.xn))))


def resample(values, N_new: int) -> np.ndarray:
    """Trigonometric interpolation of periodic node samples onto N_new equispaced nodes."""
    vals = np.asarray(values)
    N = vals.shape[0]
    if N == N_new:
        return vals.copy()
    coef = np.fft.fft(vals, axis=0) / N
    out = np.zeros((N_new,) + vals.shape[1:], dtype=complex)
    half = min(N, N_new) // 2
    out[:half] = coef[:half]
    out[N_new - half + 1:] = coef[N - half + 1:]
    # split the shared Nyquist-band coefficient symmetrically
    if N < N_new:
        out[half] = 0.5 * coef[half]
        out[N_new - half] = 0.5 * coef[half]
    else:
        out[half] = coef[half] + (coef[N - half] if N_new < N else 0)
    res = np.fft.ifft(out * N_new, axis=0)
    return res.real if not np.iscomplexobj(vals) else res
