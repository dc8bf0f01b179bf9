"""Acceptance suite: one PASS/FAIL line per criterion, printed to the terminal.

Large comparisons are cached per module so each solve runs once.  The
pentafoil runs at k = 300 are opt-in through ``pytest --heavy``.
"""

import math
import time

import numpy as np
import pytest

from ntdeig.geometry import CurveSpec, arclength_derivative, default_n, discretize, weighted_norm
from ntdeig.harness import (
    SweepConfig, dump_json, match_and_score, modes_to_dict, reference_to_dict, solvespectrum,
)
from ntdeig.layerops import assemble_sd
from ntdeig.ntdflow import crossing_slope, ntd_spectrum_cayley, ntd_spectrum_direct, select_window
from ntdeig.reference import ReferenceConfig, solve_reference
from ntdeig.specfun import bessel01
from oracles import bessel_zeros_between

DISK = CurveSpec.circle(1.0)
NONSYM = CurveSpec.smoothnonsym(0.3, 0.2, 3)
PENTA = CurveSpec.smoothstar(0.3, 5)
J11 = 3.8317059702075125


@pytest.fixture
def verdict(capsys):
    """Print one line per criterion (bypassing capture), then assert."""
    def emit(name, checks, detail=""):
        ok = all(checks.values())
        failed = [k for k, v in checks.items() if not v]
        with capsys.disabled():
            line = f"\nACCEPTANCE {name}: {'PASS' if ok else 'FAIL'}"
            if detail:
                line += f"  [{detail}]"
            if failed:
                line += f"  failed: {', '.join(failed)}"
            print(line)
        assert ok, failed
    return emit


def run_pair(spec, k_lo, k_hi, N, eps=0.1):
    """NtD sweep and reference search on the same discretization; returns (report, t_ntd, t_ref)."""
    cfg = SweepConfig(spec, k_lo, k_hi, eps, n=N)
    t0 = time.perf_counter()
    modes = solvespectrum(cfg)
    t_ntd = time.perf_counter() - t0
    nodes = discretize(spec, N)
    rcfg = ReferenceConfig(tol=1e-12)
    t0 = time.perf_counter()
    ref_modes, probes = solve_reference(k_lo, k_hi, nodes, rcfg)
    t_ref = time.perf_counter() - t0
    ntd = modes_to_dict(cfg, modes)
    ntd["timing"] = {"elapsed": t_ntd}
    ref = reference_to_dict(spec, N, k_lo, k_hi, rcfg, ref_modes, probes)
    ref["timing"] = {"elapsed": t_ref}
    return match_and_score(ntd, ref), modes, t_ntd, t_ref


# 1 ---------------------------------------------------------------------------

def test_criterion_1_disk_reference(verdict):
    nodes = discretize(DISK, 128)
    checks, details = {}, []
    t0 = time.perf_counter()
    for lo, hi in ((2.0, 6.0), (2.0, 6.5)):
        modes, _ = solve_reference(lo, hi, nodes, ReferenceConfig(tol=1e-12), extract=False)
        oracle = bessel_zeros_between(lo, hi)
        found = [(m.kj, m.multiplicity) for m in modes]
        tag = f"[{lo:g},{hi:g}]"
        checks[f"{tag} frequencies"] = len(found) == len(oracle)
        if len(found) == len(oracle):
            err = max(abs(a[0] - b[0]) for a, b in zip(found, oracle))
            checks[f"{tag} within 1e-10"] = err <= 1e-10
            checks[f"{tag} multiplicities"] = [m for _, m in found] == [m for _, m in oracle]
        total = sum(m for _, m in found)
        details.append(f"{tag}: {total} eigenfrequencies, multiplicities {[m for _, m in found]}")
    # eight eigenfrequencies with multiplicities 1,2,2,1,2 are those below 6.5
    checks["eight with 1,2,2,1,2"] = [m for _, m in bessel_zeros_between(2.0, 6.5)] == [1, 2, 2, 1, 2]
    elapsed = time.perf_counter() - t0
    checks["runtime < 60 s"] = elapsed < 60
    verdict("1 disk reference solver", checks, "; ".join(details) + f"; {elapsed:.1f}s")


# 2 ---------------------------------------------------------------------------

def test_criterion_2_disk_ntd(verdict):
    t0 = time.perf_counter()
    modes = solvespectrum(SweepConfig(DISK, 10.0, 10.5, 0.1, n=96, khat="riccati", fhat="quadratic"))
    elapsed = time.perf_counter() - t0
    oracle = bessel_zeros_between(10.0, 10.5)
    zeros = np.array([k for k, _ in oracle])
    errs = [float(np.min(np.abs(zeros - m.khat))) for m in modes]
    checks = {
        "count": len(modes) == sum(m for _, m in oracle),
        "every khat within 1e-6": bool(errs) and max(errs) <= 1e-6,
        "runtime < 60 s": elapsed < 60,
    }
    verdict("2 disk NtD sweep", checks,
            f"{len(modes)} modes vs {sum(m for _, m in oracle)}; max err {max(errs, default=float('nan')):.2e}; "
            f"{elapsed:.1f}s")


# 3 ---------------------------------------------------------------------------

@pytest.fixture(scope="module")
def table_30_40():
    return run_pair(NONSYM, 30.0, 40.0, 300)


def test_criterion_3_table_reproduction(verdict, table_30_40):
    rep, _, t_ntd, t_ref = table_30_40
    a = rep.aggregates
    checks = {
        "176 NtD modes": a["count_ntd"] == 176,
        "176 reference modes": a["count_ref"] == 176,
        "one-to-one": rep.status == "PASS",
        "max |dk| <= 5e-7": a["max_abs_k_err"] <= 5e-7,
        "median |dk| <= 5e-8": a["median_abs_k_err"] <= 5e-8,
        "max f err <= 5e-3": a["max_f_err"] <= 5e-3,
        "median f err <= 5e-4": a["median_f_err"] <= 5e-4,
    }
    verdict("3 [30,40] table row", checks,
            f"counts {a['count_ntd']}/{a['count_ref']}; |dk| max {a['max_abs_k_err']:.2e} "
            f"median {a['median_abs_k_err']:.2e}; f err max {a['max_f_err']:.2e} "
            f"median {a['median_f_err']:.2e}; speedup {a['speedup']:.1f}x ({t_ntd:.0f}s vs {t_ref:.0f}s)")


# 4 ---------------------------------------------------------------------------

SLOPE_TARGETS = {
    "k_err_linear": (3.0, 0.3),
    "k_err_riccati": (5.0, 0.5),
    "f_err_trivial": (1.0, 0.2),
    "f_err_quadratic": (3.0, 0.5),
}


def test_criterion_4_error_scaling(verdict):
    # shortened range [90,92] of the full [90,100] study
    t0 = time.perf_counter()
    rep, _, _, _ = run_pair(NONSYM, 90.0, 92.0, 720)
    elapsed = time.perf_counter() - t0
    checks = {"one-to-one": rep.status == "PASS", "runtime <= 30 min": elapsed <= 1800}
    details = []
    for col, (want, tol) in SLOPE_TARGETS.items():
        fit = rep.scaling[col]
        slope = fit["slope"]
        checks[f"{col} slope {want:g}+-{tol:g}"] = slope is not None and abs(slope - want) <= tol
        details.append(f"{col} {'n/a' if slope is None else f'{slope:.2f}'} ({fit['points']} pts)")
    verdict("4 error-scaling slopes [90,92]", checks, "; ".join(details) + f"; {elapsed:.0f}s")


# 5 ---------------------------------------------------------------------------

def test_criterion_5_cayley_robustness(verdict):
    # J1(k) = 0 here, so the m = +-1 branches sit exactly at beta = 0 while m = 0 has a pole
    Ns = [16, 18, 20, 22, 24, 28, 32, 48, 64]
    cay, dir_ = [], []
    for N in Ns:
        nodes = discretize(DISK, N)
        cay.append(float(np.min(np.abs(ntd_spectrum_cayley(J11, nodes).betas))))
        dir_.append(float(np.min(np.abs(ntd_spectrum_direct(J11, nodes).betas))))
    cay, dir_ = np.array(cay), np.array(dir_)
    pre = cay[:5]
    ratios = pre[:-1] / pre[1:]
    stable = cay[5:]
    checks = {
        "geometric decay": bool(np.all(ratios > 10)),
        "1e-12 stable": bool(np.all(stable <= 1e-12)) and float(np.ptp(stable)) <= 1e-12,
        "direct >= 1e4x worse": bool(np.all(dir_[5:] >= 1e4 * max(stable.max(), 1e-12))),
    }
    verdict("5 Cayley robustness at a Neumann frequency", checks,
            f"Cayley |beta| {', '.join(f'{v:.1e}' for v in cay)}; direct {', '.join(f'{v:.1e}' for v in dir_)}")


# 6 ---------------------------------------------------------------------------

def test_criterion_6_slope_law(verdict):
    checks, worst = {}, {}
    disk_k = [k for k, m in bessel_zeros_between(2.0, 16.0) if m == 1][:5]
    nodes = discretize(DISK, 96)
    rel = [abs(crossing_slope(nodes, k) * k - 1) for k in disk_k]
    checks["disk 5 crossings within 1%"] = len(rel) == 5 and max(rel) <= 0.01
    worst["disk"] = max(rel)

    nodes = discretize(NONSYM, 128)
    found, _ = solve_reference(10.0, 12.0, nodes, ReferenceConfig(tol=1e-12), extract=False)
    simple = [m.kj for m in found if m.multiplicity == 1][:5]
    rel = [abs(crossing_slope(nodes, k) * k - 1) for k in simple]
    checks["smoothnonsym 5 crossings within 1%"] = len(rel) == 5 and max(rel) <= 0.01
    worst["smoothnonsym"] = max(rel, default=float("nan"))
    verdict("6 slope law", checks, "; ".join(f"{d} worst {v:.1e}" for d, v in worst.items()))


# 7 ---------------------------------------------------------------------------

def test_criterion_7_property_spot_checks(verdict, tmp_path):
    checks = {}
    n = discretize(NONSYM, 1024)
    checks["d_s(x.t) = 1 - kappa x.n"] = np.max(np.abs(arclength_derivative(n.xt, n) - (1 - n.kappa * n.xn))) < 1e-9

    x = np.geomspace(1e-3, 1e3, 400)
    j0, y0, j1, y1 = bessel01(x)
    w = j1 * y0 - j0 * y1
    checks["Wronskian"] = bool(np.all(np.abs(w - 2 / (math.pi * x)) <= 1e-13 * np.maximum(1, 2 / (math.pi * x))))

    nodes = discretize(NONSYM, 256)
    S, D = assemble_sd(20.0, nodes)
    d = np.array([0.6, 0.8])
    u = np.exp(20j * (nodes.z @ d))
    un = 20j * (nodes.normal @ d) * u
    checks["Green identity"] = np.max(np.abs(0.5 * u + D.entries @ u - S.entries @ un)) <= 1e-12

    nodes = discretize(NONSYM, 160)
    kept = select_window(ntd_spectrum_cayley(20.0, nodes), 0.5)
    checks["unitarity"] = bool(kept) and max(abs(abs(p.lam) - 1) for p in kept) <= 1e-10
    checks["weighted normalization"] = max(abs(weighted_norm(p.f, nodes) - 1) for p in kept) <= 1e-12

    modes, _ = solve_reference(20.0, 20.3, nodes)
    gram_err = 0.0
    for m in modes:
        V = np.column_stack(m.dn_phi)
        G = V.T @ (V * (nodes.w * nodes.xn)[:, None])
        gram_err = max(gram_err, float(np.max(np.abs(G / (2 * m.kj ** 2) - np.eye(len(m.dn_phi))))))
    checks["Rellich normalization"] = bool(modes) and gram_err <= 1e-8

    cfg = SweepConfig(NONSYM, 12.0, 12.3, n=96)
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    dump_json(modes_to_dict(cfg, solvespectrum(cfg)), a)
    dump_json(modes_to_dict(cfg, solvespectrum(cfg)), b)
    checks["determinism"] = a.read_bytes() == b.read_bytes()
    verdict("7 property spot checks", checks)


# 8 ---------------------------------------------------------------------------

def _degeneracy_checks(spec, k_lo, k_hi, N):
    rep, modes, _, _ = run_pair(spec, k_lo, k_hi, N)
    angles = [r["subspace_angle"] for r in rep.rows if r["multiplicity"] > 1]
    checks = {
        "counts equal": rep.aggregates["count_ntd"] == rep.aggregates["count_ref"],
        "one-to-one": rep.status == "PASS",
        "degenerate clusters present": bool(angles),
        "subspace angles <= 1e-2": bool(angles) and max(angles) <= 1e-2,
        "no fallback flags": not any(m.riccati_fallback for m in modes),
    }
    detail = (f"counts {rep.aggregates['count_ntd']}/{rep.aggregates['count_ref']}; "
              f"{len(angles) // 2} degenerate pairs, worst angle {max(angles, default=float('nan')):.1e}")
    return checks, detail


def test_criterion_8_pentafoil_degeneracy(verdict):
    # the default 6.3 points per wavelength (N = 276) leaves t1 ~ 1e-7 at the
    # double roots here, short of the 1e-12 reference tolerance
    checks, detail = _degeneracy_checks(PENTA, 30.0, 30.5, 360)
    verdict("8 pentafoil degeneracy [30,30.5]", checks, detail)


@pytest.mark.heavy
def test_criterion_8_pentafoil_heavy(verdict):
    N = 2 * int(0.65 * default_n(PENTA, 300.1))
    checks, detail = _degeneracy_checks(PENTA, 300.0, 300.1, N)
    verdict("8 pentafoil degeneracy [300,300.1]", checks, detail)

