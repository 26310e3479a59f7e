"""Acceptance gate: one test per criterion, each with its runtime budget.

Run ``pytest tests/test_acceptance.py -v``; the terminal summary lists a
PASS/FAIL line per criterion.
"""

import os
import subprocess
import sys
import time

import numpy as np
import pytest
from scipy import stats

from conftest import random_dataset
from oracles import bisect_boundary, prefix_refit
from recdiag.cusum import Boundary, boundary_equation, cusum_path, detect_crossing
from recdiag.engine import Method, recursive_trace_resolve, recursive_trace_update, trace_ensemble
from recdiag.linalg import fit_ols
from recdiag.permute import PermutationSchedule, circular_permutation
from recdiag.pipeline import RunConfig, replay, run_compare, run_pipeline
from recdiag.simgen import ScenarioSpec, generate, generate_clean, ill_conditioned_dataset

N_NULL = 100
IDENTITY = tuple(range(1, N_NULL + 1))


class Timer:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start
        return False


def test_c1_boundary_constant(acceptance_report):
    with Timer() as clock:
        proc = subprocess.run([sys.executable, "-m", "recdiag.cli", "boundary", "--alpha", "0.01"],
                              capture_output=True, text=True, check=True)
    a = float(proc.stdout.split("=")[1])
    from recdiag.cusum import solve_boundary_constant
    residuals = {alpha: abs(boundary_equation(solve_boundary_constant(alpha), alpha))
                 for alpha in (0.001, 0.01, 0.05, 0.1)}
    independent = bisect_boundary(0.01)
    ok = (abs(a - 1.143) <= 5e-4 and max(residuals.values()) <= 1e-9
          and abs(a - independent) < 5e-7 and clock.elapsed < 1.0)
    acceptance_report("C1 boundary constant", ok,
                      f"a={a:.6f}, max residual {max(residuals.values()):.1e}, {clock.elapsed:.2f}s")
    assert abs(a - 1.143) <= 5e-4
    assert abs(a - independent) < 5e-7
    assert max(residuals.values()) <= 1e-9
    assert clock.elapsed < 1.0


def test_c2_oracle_equivalence(acceptance_report):
    rng = np.random.default_rng(2)
    worst = 0.0
    with Timer() as clock:
        for _ in range(50):
            p = int(rng.integers(1, 4))
            n = int(rng.integers(p + 2, 13))
            data = random_dataset(rng, n, p, intercept=bool(rng.integers(0, 2)) or p == 1)
            perms = [tuple(int(v) for v in rng.permutation(n) + 1) for _ in range(4)]
            for perm in perms:
                idx = np.asarray(perm) - 1
                X, y = data.X[idx], data.y[idx]
                trace = recursive_trace_resolve(data, perm)
                for i, k in enumerate(trace.subset_size):
                    beta, sigma2, r2 = prefix_refit(X, y, int(k))
                    worst = max(worst, np.max(np.abs(trace.beta[i] - beta)))
                    if k > p:
                        worst = max(worst, abs(trace.sigma2[i] - sigma2))
                        if data.has_intercept:
                            worst = max(worst, abs(trace.r2[i] - r2))
                    if i > 0:
                        prev = np.linalg.lstsq(X[:k - 1], y[:k - 1], rcond=None)[0]
                        info = np.linalg.inv(X[:k - 1].T @ X[:k - 1])
                        x = X[k - 1]
                        w = (y[k - 1] - x @ prev) / np.sqrt(1 + x @ info @ x)
                        worst = max(worst, abs(trace.recursive_residual[i] - w))
    ok = worst <= 1e-9 and clock.elapsed < 60
    acceptance_report("C2 oracle equivalence", ok, f"max discrepancy {worst:.2e}, {clock.elapsed:.1f}s")
    assert worst <= 1e-9
    assert clock.elapsed < 60


def _max_gap(a, b):
    gaps = [np.nanmax(np.abs(a.beta - b.beta)), np.nanmax(np.abs(a.sigma2 - b.sigma2))]
    return float(max(gaps))


def test_c3_update_vs_resolve(acceptance_report):
    with Timer() as clock:
        clean = generate(ScenarioSpec(n=100, rng_seed=1))
        perms = [circular_permutation(100, k) for k in (1, 17, 50, 83)]
        clean_gap = max(_max_gap(recursive_trace_resolve(clean, q), recursive_trace_update(clean, q))
                        for q in perms)
        ill = ill_conditioned_dataset()
        ident = tuple(range(1, ill.n + 1))
        ill_gap = _max_gap(recursive_trace_resolve(ill, ident), recursive_trace_update(ill, ident))
    ok = clean_gap <= 1e-6 and ill_gap > 1e-4 and clock.elapsed < 10
    acceptance_report("C3 update vs resolve", ok,
                      f"clean {clean_gap:.1e}, ill-conditioned {ill_gap:.1e}, {clock.elapsed:.1f}s")
    assert clean_gap <= 1e-6
    assert ill_gap > 1e-4
    assert clock.elapsed < 10


def test_c4_null_residual_law(acceptance_report):
    pooled, lag_pairs = [], []
    with Timer() as clock:
        for seed in range(200):
            data, _ = generate_clean(ScenarioSpec(n=N_NULL, rng_seed=seed))
            w = recursive_trace_resolve(data, IDENTITY).residuals
            pooled.append(w)
            lag_pairs.append(np.column_stack([w[:-1], w[1:]]))
    w = np.concatenate(pooled)
    m = w.size
    pairs = np.concatenate(lag_pairs)
    ks_p = stats.kstest(w, "norm", args=(0.0, 0.1)).pvalue
    var = float(np.var(w))
    rho = float(np.corrcoef(pairs[:, 0], pairs[:, 1])[0, 1])
    ok = ks_p > 0.01 and abs(var - 0.01) <= 0.001 and abs(rho) <= 3 / np.sqrt(m) and clock.elapsed < 120
    acceptance_report("C4 null residual law", ok,
                      f"KS p={ks_p:.3f}, var={var:.5f}, lag-1 rho={rho:.4f} "
                      f"(limit {3 / np.sqrt(m):.4f}), {clock.elapsed:.1f}s")
    assert ks_p > 0.01
    assert abs(var - 0.01) <= 0.001
    assert abs(rho) <= 3 / np.sqrt(m)
    assert clock.elapsed < 120


def test_c5_cusum_calibration(acceptance_report):
    boundary = Boundary.for_alpha(0.01)
    crossed = total = 0
    with Timer() as clock:
        for seed in range(1000, 1020):
            data, _ = generate_clean(ScenarioSpec(n=N_NULL, rng_seed=seed))
            sigma_hat = float(np.sqrt(fit_ols(data).sigma2_hat))
            ens = trace_ensemble(data, PermutationSchedule("circular", N_NULL), Method.RESOLVE)
            for tr in ens.valid_traces:
                path = cusum_path(tr.residuals, sigma_hat, N_NULL, perm_id=tr.perm_id)
                crossed += detect_crossing(path, boundary).crossed
                total += 1
    rate = crossed / total
    ok = total == 2000 and 0.003 <= rate <= 0.03 and clock.elapsed < 300
    acceptance_report("C5 CUSUM calibration", ok,
                      f"{crossed}/{total} paths crossed (rate {rate:.4f}), {clock.elapsed:.1f}s")
    assert total == 2000
    assert 0.003 <= rate <= 0.03
    assert clock.elapsed < 300


def test_c6_outlier_visibility(acceptance_report):
    rates = {}
    with Timer() as clock:
        for target in ("none", "x", "y", "both"):
            hits = 0
            for seed in range(200):
                tr = recursive_trace_resolve(generate(ScenarioSpec(n=100, target=target, rng_seed=seed)),
                                             IDENTITY)
                j = int(np.nanargmax(np.diff(tr.sigma2))) + 1
                hits += int(tr.subset_size[j]) == 50
            rates[target] = hits / 200
    ok = (min(rates["x"], rates["y"], rates["both"]) >= 0.95 and rates["none"] <= 0.10
          and clock.elapsed < 120)
    acceptance_report("C6 outlier visibility", ok,
                      ", ".join(f"{k}={v:.3f}" for k, v in rates.items()) + f", {clock.elapsed:.1f}s")
    for target in ("x", "y", "both"):
        assert rates[target] >= 0.95
    assert rates["none"] <= 0.10
    assert clock.elapsed < 120


def test_c7_dataset_workflows(acceptance_report, tmp_path):
    with Timer() as clock:
        alc = run_compare(RunConfig(dataset="alcohol_tobacco", schedule="random:100", seed=5,
                                    formats=("csv", "png"), out=str(tmp_path / "alc")),
                          [["Northern Ireland"]])
        full_alc = alc["full"].ensemble.valid_traces[0].sigma2[-1]
        red_alc = alc["drop_Northern-Ireland"].ensemble.valid_traces[0].sigma2[-1]
        smk = run_compare(RunConfig(dataset="smoking_cancer", schedule="random:100", seed=5,
                                    formats=("csv", "svg", "png"), out=str(tmp_path / "smk")),
                          [["NE"], ["DC"], ["NE", "DC"]])
        full_smk = smk["full"].ensemble.valid_traces[0].sigma2[-1]
        both_smk = smk["drop_NE_DC"].ensemble.valid_traces[0].sigma2[-1]
    overlays = sorted(p.name for p in (tmp_path / "smk").glob("drop_*") if (p / "sigma2.svg").exists())
    ratio = full_alc / red_alc
    ok = (len(alc["full"].ensemble.valid_traces) == 100 and ratio >= 2 and len(overlays) == 3
          and full_smk > both_smk and clock.elapsed < 30)
    acceptance_report("C7 dataset workflows", ok,
                      f"alcohol sigma2 ratio {ratio:.2f}; smoking full {full_smk:.3f} > "
                      f"both removed {both_smk:.3f}; overlays {overlays}, {clock.elapsed:.1f}s")
    assert len(alc["full"].ensemble.valid_traces) == 100
    assert ratio >= 2
    assert overlays == ["drop_DC", "drop_NE", "drop_NE_DC"]
    assert full_smk > both_smk
    assert clock.elapsed < 30


def test_c8_determinism(acceptance_report, tmp_path, monkeypatch):
    with Timer() as clock:
        run_pipeline(RunConfig(dataset="smoking_cancer", schedule="random:60", seed=9, grid=50,
                               formats=("csv",), out=str(tmp_path / "orig")))
        manifest = tmp_path / "orig" / "manifest.json"
        for threads in ("1", "4"):
            monkeypatch.setenv("RECDIAG_THREADS", threads)
            replay(manifest, str(tmp_path / f"t{threads}"))
    names = sorted(p.name for p in (tmp_path / "orig").glob("*.csv"))
    same = all((tmp_path / "orig" / n).read_bytes() == (tmp_path / d / n).read_bytes()
               for n in names for d in ("t1", "t4"))
    ok = same and len(names) >= 4 and clock.elapsed < 60
    acceptance_report("C8 determinism", ok, f"{len(names)} CSVs compared across 3 runs, {clock.elapsed:.1f}s")
    assert os.environ["RECDIAG_THREADS"] == "4"
    assert len(names) >= 4
    assert same
    assert clock.elapsed < 60
