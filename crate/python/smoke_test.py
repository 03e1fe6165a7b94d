#!/usr/bin/env python3
"""Smoke test for the coded_matmul_py extension module.

Build the extension first, then run this script:

    cargo build -p coded-matmul-py
    python3 python/smoke_test.py

The script copies the built shared object into a temporary directory
under the importable name and exercises each exposed surface once.
"""

import math
import pathlib
import shutil
import sys
import tempfile

ROOT = pathlib.Path(__file__).resolve().parents[1]


def import_extension():
    candidates = [
        ROOT / "target" / profile / name
        for profile in ("debug", "release")
        for name in ("libcoded_matmul_py.so", "coded_matmul_py.so", "libcoded_matmul_py.dylib")
    ]
    built = next((path for path in candidates if path.exists()), None)
    if built is None:
        sys.exit("extension not built; run: cargo build -p coded-matmul-py")
    stage = pathlib.Path(tempfile.mkdtemp(prefix="coded_matmul_py."))
    shutil.copy(built, stage / "coded_matmul_py.so")
    sys.path.insert(0, str(stage))
    import coded_matmul_py

    return coded_matmul_py


def main():
    cm = import_extension()

    # Exact product A^T B over checked integers.
    a = cm.Matrix([[1, 2], [3, 4]])
    b = cm.Matrix([[5, 6], [7, 8]])
    product = cm.matmul(a, b)
    assert product.tolist() == [[26, 30], [38, 44]], product.tolist()
    assert product.rows == 2 and product.cols == 2

    # Built-in [5,2,2,2] array code: MDS over every node pair,
    # recovery threshold 7, catalog round trip.
    code = cm.ArrayCode.builtin()
    assert (code.n, code.k, code.b, code.sigma) == (5, 2, 2, 2)
    ok, witness = code.is_mds()
    assert ok and witness is None, witness
    assert code.recovery_threshold() == 7
    assert cm.ArrayCode.parse(code.serialize()).cells() == code.cells()

    # Randomized search finds a fresh valid code deterministically.
    searched = cm.ArrayCode.search(4, 2, 2, 2, seed=5)
    assert searched.is_mds()[0]
    assert searched.cells() == cm.ArrayCode.search(4, 2, 2, 2, seed=5).cells()

    # Blocklength bounds at the reference operating points.
    assert cm.max_blocklength(100, 100, 7) == 106
    assert cm.max_blocklength_asym(100, 100, 7, 3.0) == 137
    assert cm.max_blocklength_asym(1000, 100, 7, 3.0) == 1027
    eps = cm.epsilon_for_stragglers(100, 100, 7, 137)
    assert cm.max_blocklength_asym(100, 100, 7, eps) >= 137

    # Monte Carlo agrees with the closed form where it is exact.
    sim = cm.mc_simulate("uncoded", k=1, n=2, b=20, trials=20_000, seed=1)
    assert abs(sim["mean_total"] / cm.harmonic(20) - 1.0) < 0.05, sim
    assert sim["closed_form_hnumber"] == cm.harmonic(20)
    cf = cm.closed_form("amds", k=100, n=106, b=20, sigma=7)
    assert math.isclose(cf["total"], cf["encode"] + cf["parallel"] + cf["decode"])
    sim = cm.mc_simulate("amds", k=100, n=106, b=20, sigma=7, trials=5_000, seed=2)
    assert abs(sim["mean_total"] / cf["total"] - 1.0) < 0.15, (sim, cf)

    # Communication overheads at the comparison point.
    comm = cm.comm_overheads("poly", k=100, n=137, b=100, sigma=7)
    assert abs(comm["ms_overhead"] - 0.37) < 1e-9, comm

    # Experiment layer: presets run deterministically end to end.
    config = cm.preset("table4")
    config = config.replace("[scenario]", "[scenario]\ntrials = 200", 1)
    first = cm.run_config(config)
    assert first == cm.run_config(config)
    assert first.startswith("# coded-matmul csv schema v1\n")
    assert len(first.splitlines()) == 2 + 8
    series = cm.emit_plotdata(first)
    assert [name for name, _ in series] == [
        "table4_amds.dat",
        "table4_asym.dat",
        "table4_matdot.dat",
        "table4_poly.dat",
    ], [name for name, _ in series]

    # End-to-end exactness: encode, straggle, decode, compare.
    report = cm.selftest("amds")
    assert report["passed"], report
    assert report["peel_trace"] == 4, report

    print("smoke test passed: matrices, array codes, bounds, latency, comm costs and presets all behave")


if __name__ == "__main__":
    main()
