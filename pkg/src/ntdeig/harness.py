"""Window sweeps, reference comparison, error scaling fits and artifact I/O."""

from __future__ import annotations

import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
import scipy.linalg as sla

from .estimators import (
    F_ESTIMATORS, estimate, fhat as fhat_estimate, khat_linear, khat_riccati,
)
from .geometry import BoundaryNodes, CurveSpec, default_n, discretize, resample
from .ntdflow import ntd_spectrum_cayley, select_window
from .reference import ReferenceMode

log = logging.getLogger(__name__)

_KHAT_ALIASES = {"l": "linear", "r": "riccati", "linear": "linear", "riccati": "riccati"}
_FHAT_ALIASES = {"t": "trivial", "l": "linear", "q": "quadratic",
                 "trivial": "trivial", "linear": "linear", "quadratic": "quadratic"}


@dataclass
class SweepConfig:
    domain: CurveSpec
    k_lo: float
    k_hi: float
    eps: float = 0.1
    n: int | None = None          # None: 6.3 points per wavelength at each window midpoint
    khat: str = "riccati"
    fhat: str = "quadratic"
    eta_factor: float = 1.0       # eta = eta_factor * kstar
    workers: int = 1
    ppw: float = 6.3

    def __post_init__(self):
        self.khat = _KHAT_ALIASES[self.khat]
        self.fhat = _FHAT_ALIASES[self.fhat]
        if not self.eps > 0:
            raise ValueError("eps must be positive")
        if not self.k_lo > 0:
            raise ValueError("k_lo must be positive")
        if self.k_hi < self.k_lo:
            raise ValueError("empty or reversed range")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["domain"] = self.domain.label()
        return d


def windows(k_lo: float, k_hi: float, eps: float):
    """Half-open windows [k_lo + i eps, k_lo + (i+1) eps) clipped to k_hi."""
    out = []
    i = 0
    while True:
        lo = k_lo + i * eps
        if lo >= k_hi:
            break
        out.append((lo, min(k_lo + (i + 1) * eps, k_hi)))
        i += 1
    return out


_NODE_CACHE: dict = {}


def nodes_for(spec: CurveSpec, N: int) -> BoundaryNodes:
    key = (spec, N)
    if key not in _NODE_CACHE:
        if len(_NODE_CACHE) > 8:
            _NODE_CACHE.clear()
        _NODE_CACHE[key] = discretize(spec, N)
    return _NODE_CACHE[key]


def _window_n(cfg: SweepConfig, lo: float, hi: float) -> int:
    return cfg.n if cfg.n else default_n(cfg.domain, 0.5 * (lo + hi), cfg.ppw)


# linear images can overshoot the upper window edge by O(eps^3 / k^2); a mode
# lost that way is not recovered by the next window, where its beta is positive
EDGE_MARGIN = 0.1


def _solve_window(cfg: SweepConfig, lo: float, hi: float) -> list:
    nodes = nodes_for(cfg.domain, _window_n(cfg, lo, hi))
    spec = ntd_spectrum_cayley(lo, nodes, eta=cfg.eta_factor * lo)
    if cfg.khat == "linear":
        return [estimate(p, nodes, cfg.khat, cfg.fhat) for p in select_window(spec, hi - lo)]
    cands = [estimate(p, nodes, cfg.khat, cfg.fhat) for p in select_window(spec, hi - lo, EDGE_MARGIN)]
    return [m for m in cands if lo <= m.khat < hi]


def _solve_window_star(args):
    return _solve_window(*args)


def solvespectrum(cfg: SweepConfig) -> list:
    """Mode estimates for every eigenfrequency in [k_lo, k_hi), sorted by khat."""
    wins = windows(cfg.k_lo, cfg.k_hi, cfg.eps)
    jobs = [(cfg, lo, hi) for lo, hi in wins]
    if cfg.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            per_window = list(pool.map(_solve_window_star, jobs))
    else:
        per_window = [_solve_window(*job) for job in jobs]
    modes = [m for batch in per_window for m in batch]
    modes.sort(key=lambda m: m.khat)
    return modes


# --- comparison -------------------------------------------------------------

@dataclass
class ComparisonReport:
    rows: list
    aggregates: dict
    status: str
    unmatched_ntd: list = field(default_factory=list)
    unmatched_ref: list = field(default_factory=list)
    scaling: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"status": self.status, "aggregates": self.aggregates, "scaling": self.scaling,
                "unmatched_ntd": self.unmatched_ntd, "unmatched_ref": self.unmatched_ref,
                "rows": self.rows}


def _weighted_gram(A: np.ndarray, B: np.ndarray, nodes: BoundaryNodes) -> np.ndarray:
    return A.conj().T @ (B * (nodes.w / nodes.xn)[:, None])


def _orthonormal(A: np.ndarray, nodes: BoundaryNodes) -> np.ndarray:
    G = _weighted_gram(A, A, nodes)
    evals, evecs = np.linalg.eigh(G)
    return A @ (evecs / np.sqrt(evals)) @ evecs.conj().T


def phase_aligned_error(f: np.ndarray, g: np.ndarray, nodes: BoundaryNodes) -> float:
    """min over |alpha| = 1 of ||f - alpha g|| for unit f, g in the weighted norm."""
    f, g = np.ravel(f), np.ravel(g)
    ip = abs(complex(_weighted_gram(f[:, None], g[:, None], nodes)[0, 0]))
    return math.sqrt(max(0.0, 2.0 - 2.0 * ip))


def subspace_angle(A: np.ndarray, B: np.ndarray, nodes: BoundaryNodes) -> float:
    """Largest principal angle between column spans, in the weighted inner product."""
    sq = np.sqrt(nodes.w / nodes.xn)[:, None]
    return float(np.max(sla.subspace_angles(A * sq, B * sq)))


def reference_f(mode: ReferenceMode, nodes: BoundaryNodes) -> np.ndarray:
    """Unit-norm boundary functions f = (x.n) dn(phi) / (sqrt(2) k) as columns."""
    cols = [nodes.xn * np.asarray(v) / (math.sqrt(2.0) * mode.kj) for v in mode.dn_phi]
    return np.column_stack(cols) if cols else np.zeros((nodes.N, 0))


def _cluster_reference(ref: list, rel_tol: float) -> list:
    clusters: list = []
    for m in sorted(ref, key=lambda m: m.kj):
        if clusters and abs(m.kj - clusters[-1][-1].kj) < rel_tol * m.kj:
            clusters[-1].append(m)
        else:
            clusters.append([m])
    return clusters


def _greedy_match(est_k: np.ndarray, centers: np.ndarray, capacity: list):
    """Assign estimates to clusters by increasing distance, respecting capacities."""
    cand = []
    for i, k in enumerate(est_k):
        j = int(np.searchsorted(centers, k))
        for c in range(max(0, j - 2), min(len(centers), j + 2)):
            cand.append((abs(k - centers[c]), i, c))
    cand.sort()
    cap = list(capacity)
    assign = [-1] * len(est_k)
    for _, i, c in cand:
        if assign[i] < 0 and cap[c] > 0:
            assign[i] = c
            cap[c] -= 1
    return assign, cap


def _all_estimates(m: dict, nodes: BoundaryNodes) -> dict:
    kstar, beta, f = m["kstar"], m["beta"], np.asarray(m["f"])
    k_lin = khat_linear(kstar, beta)
    k_ric, _ = khat_riccati(kstar, beta, f, nodes)
    fs = {kind: fhat_estimate(kind, f, kstar, k_ric, nodes) for kind in F_ESTIMATORS}
    return {"k_linear": k_lin, "k_riccati": k_ric, "f": fs}


def match_and_score(ntd: dict, ref: dict, cluster_tol: float = 1e-6, all_estimators: bool = True) -> ComparisonReport:
    """Compare solve output against reference output (both in their JSON dict form)."""
    spec = CurveSpec.parse(ref["domain"])
    ref_nodes = nodes_for(spec, int(ref["N"]))
    ref_modes = [ReferenceMode(float(r["kj"]), int(r["multiplicity"]),
                               [np.asarray(v, dtype=float) for v in r.get("dn_phi", [])])
                 for r in ref["modes"]]
    clusters = _cluster_reference(ref_modes, cluster_tol)
    centers = np.array([c[0].kj for c in clusters])
    capacity = [sum(m.multiplicity for m in c) for c in clusters]
    est = ntd["modes"]
    est_k = np.array([m["khat"] for m in est])
    assign, left = _greedy_match(est_k, centers, capacity) if len(centers) else ([-1] * len(est), [])

    ntd_spec = CurveSpec.parse(ntd["domain"])

    def on_ref_grid(vals, N):
        return resample(np.asarray(vals, dtype=float), ref_nodes.N) if N != ref_nodes.N else np.asarray(vals, dtype=float)

    rows = []
    by_cluster: dict = {}
    for i, c in enumerate(assign):
        if c >= 0:
            by_cluster.setdefault(c, []).append(i)
    for c, members in sorted(by_cluster.items()):
        cl = clusters[c]
        p = capacity[c]
        F_ref = np.column_stack([reference_f(m, ref_nodes) for m in cl]) if cl[0].dn_phi else None
        k_refs = sorted(m.kj for m in cl for _ in range(m.multiplicity))
        members = sorted(members, key=lambda i: est_k[i])
        extra = {i: _all_estimates(est[i], nodes_for(ntd_spec, int(est[i]["N"])))
                 for i in members} if all_estimators else {}
        for pos, i in enumerate(members):
            m = est[i]
            k_ref = k_refs[min(pos, len(k_refs) - 1)]
            row = {"j": len(rows), "k_ref": k_ref, "k_hat": m["khat"], "abs_k_err": abs(m["khat"] - k_ref),
                   "kstar": m["kstar"], "eps_j": k_ref - m["kstar"], "multiplicity": p, "cluster": c}
            if i in extra:
                row["k_err_linear"] = abs(extra[i]["k_linear"] - k_ref)
                row["k_err_riccati"] = abs(extra[i]["k_riccati"] - k_ref)
            if F_ref is not None:
                fh = on_ref_grid(m["fhat"], int(m["N"]))
                if p == 1:
                    row["f_err"] = phase_aligned_error(fh, F_ref[:, 0], ref_nodes)
                    for kind, fv in extra.get(i, {}).get("f", {}).items():
                        row[f"f_err_{kind}"] = phase_aligned_error(on_ref_grid(fv, int(m["N"])), F_ref[:, 0], ref_nodes)
                else:
                    row["f_err"] = None
            rows.append(row)
        if F_ref is not None and p > 1:
            A = np.column_stack([on_ref_grid(est[i]["fhat"], int(est[i]["N"])) for i in members])
            angle = subspace_angle(A, F_ref, ref_nodes) if len(members) == p else float("nan")
            for row in rows[-len(members):]:
                row["subspace_angle"] = angle
                row["f_err"] = angle

    unmatched_ntd = [float(est_k[i]) for i, c in enumerate(assign) if c < 0]
    unmatched_ref = [float(centers[c]) for c, n_left in enumerate(left) for _ in range(n_left)]
    count_ntd, count_ref = len(est), int(sum(capacity))
    status = "PASS" if count_ntd == count_ref and not unmatched_ntd and not unmatched_ref else "FAIL"

    def stats(key):
        vals = np.array([r[key] for r in rows if r.get(key) is not None and np.isfinite(r[key])])
        if not len(vals):
            return None, None
        return float(vals.max()), float(np.median(vals))

    kmax, kmed = stats("abs_k_err")
    fmax, fmed = stats("f_err")
    t_ntd = ntd.get("timing", {}).get("elapsed")
    t_ref = ref.get("timing", {}).get("elapsed")
    tpm_ntd = t_ntd / count_ntd if t_ntd and count_ntd else None
    tpm_ref = t_ref / count_ref if t_ref and count_ref else None
    agg = {"count_ntd": count_ntd, "count_ref": count_ref,
           "max_abs_k_err": kmax, "median_abs_k_err": kmed,
           "max_f_err": fmax, "median_f_err": fmed,
           "time_per_mode_ntd": tpm_ntd, "time_per_mode_ref": tpm_ref,
           "speedup": tpm_ref / tpm_ntd if tpm_ntd and tpm_ref else None}
    report = ComparisonReport(rows, agg, status, unmatched_ntd, unmatched_ref)
    report.scaling = fit_error_scaling(report)
    return report


SCALING_COLUMNS = ("k_err_linear", "k_err_riccati", "f_err_trivial", "f_err_linear", "f_err_quadratic")


def fit_error_scaling(report, eps_lo: float = 0.01, eps_hi: float = 0.1, min_points: int = 30,
                      min_decades: float = 0.8) -> dict:
    """Least-squares slope of log(error) against log(eps_j) over simple modes with eps_j in range."""
    rows = report.rows if isinstance(report, ComparisonReport) else report["rows"]
    out = {}
    for col in SCALING_COLUMNS:
        pts = [(r["eps_j"], r[col]) for r in rows
               if r.get(col) is not None and r["multiplicity"] == 1
               and eps_lo <= r["eps_j"] <= eps_hi and r[col] > 0]
        if len(pts) < min_points:
            out[col] = {"slope": None, "intercept": None, "points": len(pts), "flag": "insufficient points"}
            continue
        e, err = np.log10(np.array(pts)).T
        if e.max() - e.min() < min_decades:
            out[col] = {"slope": None, "intercept": None, "points": len(pts), "flag": "insufficient spread"}
            continue
        slope, intercept = np.polyfit(e, err, 1)
        out[col] = {"slope": float(slope), "intercept": float(intercept), "points": len(pts), "flag": None}
    return out


# --- artifact I/O -----------------------------------------------------------

def modes_to_dict(cfg: SweepConfig, modes: list) -> dict:
    return {
        "kind": "ntd-modes",
        "domain": cfg.domain.label(),
        "config": cfg.to_dict(),
        "count": len(modes),
        "modes": [{
            "index": i,
            "khat": float(m.khat),
            "kstar": float(m.kstar),
            "beta": float(m.source.beta),
            "N": int(m.N),
            "k_estimator": m.k_estimator,
            "f_estimator": m.f_estimator,
            "riccati_fallback": bool(m.riccati_fallback),
            "residual": float(m.source.residual),
            "f": [float(v) for v in np.real(m.source.f)],
            "fhat": [float(v) for v in np.real(m.fhat)],
        } for i, m in enumerate(modes)],
    }


def reference_to_dict(domain: CurveSpec, N: int, k_lo: float, k_hi: float, cfg, modes: list,
                      probes: int) -> dict:
    return {
        "kind": "reference-modes",
        "domain": domain.label(),
        "N": int(N),
        "range": [float(k_lo), float(k_hi)],
        "config": {k: v for k, v in asdict(cfg).items()},
        "probes": int(probes),
        "count": int(sum(m.multiplicity for m in modes)),
        "modes": [{
            "kj": float(m.kj),
            "multiplicity": int(m.multiplicity),
            "t1": float(m.t1),
            "suspect": bool(m.suspect),
            "uncertain": bool(m.uncertain),
            "dn_phi": [[float(v) for v in np.real(col)] for col in m.dn_phi],
        } for m in modes],
    }


def dump_json(obj: dict, path) -> None:
    Path(path).write_text(json.dumps(obj, indent=1, allow_nan=True) + "\n")


def timing_path(path) -> Path:
    p = Path(path)
    return p.with_name(p.name + ".timing.json")


def write_with_timing(obj: dict, path, elapsed: float) -> None:
    """Deterministic payload at ``path``; wall-clock time in a sidecar file."""
    dump_json(obj, path)
    dump_json({"elapsed": elapsed, "count": obj.get("count")}, timing_path(path))


def load_json(path) -> dict:
    data = json.loads(Path(path).read_text())
    tp = timing_path(path)
    if tp.exists() and "timing" not in data:
        data["timing"] = json.loads(tp.read_text())
    return data


def report_csv(report: ComparisonReport, path) -> None:
    cols = ["j", "k_ref", "k_hat", "abs_k_err", "f_err", "subspace_angle", "multiplicity", "kstar", "eps_j",
            *SCALING_COLUMNS]
    with open(path, "w") as fh:
        fh.write(",".join(cols) + "\n")
        for r in report.rows:
            vals = []
            for c in cols:
                v = r.get(c)
                vals.append("" if v is None else (f"{v:.17g}" if isinstance(v, float) else str(v)))
            fh.write(",".join(vals) + "\n")


def timed(fn, *args, **kwargs):
    t0 = time.perf_counter()
    out = fn(*args, **kwargs)
    return out, time.perf_counter() - t0
