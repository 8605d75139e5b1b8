#!/usr/bin/env python3
"""Smoke test for the mfcv_py extension module.

Builds nothing itself: it locates the compiled cdylib under target/
(release preferred), copies it to an importable name, and exercises the
main types and operations end to end.

Usage:
    cargo build --release -p mfcv-py
    python3 python/smoke_test.py
"""

import math
import shutil
import sys
import tempfile
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent


def load_module():
    candidates = [
        REPO / "target" / "release" / "libmfcv_py.so",
        REPO / "target" / "debug" / "libmfcv_py.so",
        REPO / "target" / "release" / "libmfcv_py.dylib",
        REPO / "target" / "debug" / "libmfcv_py.dylib",
    ]
    built = next((p for p in candidates if p.exists()), None)
    if built is None:
        sys.exit("extension not built; run: cargo build --release -p mfcv-py")
    stage = Path(tempfile.mkdtemp(prefix="mfcv-py-"))
    target = stage / ("mfcv_py" + (".so" if built.suffix == ".so" else ".so"))
    shutil.copy2(built, target)
    sys.path.insert(0, str(stage))
    import mfcv_py

    return mfcv_py


def approx(a, b, tol=1e-9):
    assert abs(a - b) <= tol * max(1.0, abs(b)), f"{a} != {b}"


def main():
    m = load_module()
    print(f"loaded mfcv_py {m.__version__}")

    # Benchmarks.
    bench = m.Benchmark("multimodal")
    assert bench.input_dim == 2
    assert bench.domain() == [(-4.0, 7.0), (-3.0, 8.0)]
    approx(bench.evaluate([0.0, 1.0], 0.7), -2.0)
    hartmann = m.Benchmark("hartmann6")
    v = hartmann.evaluate([0.20169, 0.150011, 0.476874, 0.275332, 0.311652, 0.6573], 1.0)
    assert abs(v + 3.32237) < 1e-4, v
    ishi = m.Benchmark("ishigami", levels=[0.0, 0.5, 1.0])
    assert ishi.levels == [0.0, 0.5, 1.0]
    try:
        m.Benchmark("ishigami", levels=[0.0, 0.5])
        raise AssertionError("levels without 1.0 must be rejected")
    except ValueError:
        pass
    print("PASS benchmarks")

    # Cost model.
    approx(m.cost(1.0), 550.0)
    approx(m.cost(0.0), 500.0 * (0.1 + math.exp(-10.0)))
    print("PASS cost model")

    # Sobol points: deterministic, inside the box.
    pts = m.sobol_points(64, [-4.0, -3.0], [7.0, 8.0], seed=5)
    assert pts == m.sobol_points(64, [-4.0, -3.0], [7.0, 8.0], seed=5)
    assert all(-4 <= x <= 7 and -3 <= y <= 8 for x, y in pts)
    print("PASS sobol points")

    # GP: train on a small multifidelity sample, check interpolation.
    xs = m.sobol_points(14, [-4.0, -3.0], [7.0, 8.0], seed=11)
    ss = [0.25 * (i % 5) for i in range(len(xs))]
    ys = [bench.evaluate(x, s) for x, s in zip(xs, ss)]
    gp = m.GaussianProcess.fit(xs, ss, ys, [-4.0, -3.0], [7.0, 8.0], seed=3, restarts=4)
    assert gp.n == len(xs)
    worst = max(abs(gp.predict(x, s)[0] - y) for x, s, y in zip(xs, ss, ys))
    assert worst < 0.2, f"training-point misfit {worst}"
    hyper = gp.hyperparameters()
    assert len(hyper["lengthscales"]) == 2 and hyper["noise_variance"] >= 0.0
    records = gp.loo_records()
    assert len(records) == len(xs)
    for r in records:
        assert r["ecv_mean"] >= 1.0
        approx(r["ecv_variance"] - 2.0, 4.0 * (r["ecv_mean"] - 1.0), tol=1e-12)
        assert r["log_ecv"] >= 0.0
    print("PASS gaussian process + loo records")

    # Acquisition: a batch of scored input-fidelity pairs inside the domain.
    cands = gp.acquire(seed=7, batch_size=2, fantasy_samples=8, restarts=1, grid_size=16)
    assert len(cands) == 2
    for c in cands:
        assert -4 <= c["x"][0] <= 7 and -3 <= c["x"][1] <= 8
        assert 0.0 <= c["s"] <= 1.0
        assert math.isfinite(c["score"])
    print("PASS acquisition")

    # Experiment runner: tiny quasi-random run, repeated for determinism.
    config = """
benchmark = "multimodal"
seed = 9
strategies = ["sobol"]
iterations = 2
repetitions = 1
n_seed = 8
n_test = 10

[train]
restarts = 2
max_evals_per_restart = 60
"""
    with tempfile.TemporaryDirectory(prefix="mfcv-out-") as tmp:
        out1 = m.run_experiment(config, tmp + "/a")
        out2 = m.run_experiment(config, tmp + "/b")
        assert not out1["failures"]
        assert len(out1["runs"]) == 1
        t1 = Path(out1["traces"][0]).read_bytes()
        t2 = Path(out2["traces"][0]).read_bytes()
        assert t1 == t2, "identical config+seed must reproduce the trace"
        assert Path(out1["summary"]).exists()
    print("PASS experiment runner")

    print("all smoke tests passed")


if __name__ == "__main__":
    main()
