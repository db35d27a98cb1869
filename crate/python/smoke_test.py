#!/usr/bin/env python3
"""Smoke test for the `oaxis` extension module.

Builds nothing itself: run `cargo build -p oaxis-py --release` (or debug)
first, then execute this script. It locates the compiled cdylib, exposes it
as an importable `oaxis` module, and exercises the bound API end to end.
"""

import json
import math
import shutil
import sys
import tempfile
from pathlib import Path

REPO = Path(__file__).resolve().parents[1]


def locate_cdylib():
    names = ["liboaxis.so", "liboaxis.dylib", "oaxis.dll"]
    for profile in ("release", "debug"):
        for name in names:
            p = REPO / "target" / profile / name
            if p.exists():
                return p
    sys.exit("build the extension first: cargo build -p oaxis-py --release")


def import_oaxis():
    lib = locate_cdylib()
    stage = Path(tempfile.mkdtemp(prefix="oaxis_smoke_"))
    suffix = ".pyd" if lib.suffix == ".dll" else ".so"
    shutil.copy2(lib, stage / f"oaxis{suffix}")
    sys.path.insert(0, str(stage))
    import oaxis  # noqa: E402

    return oaxis


def approx(a, b, tol):
    assert abs(a - b) <= tol, f"{a} vs {b} (tol {tol})"


def main():
    oaxis = import_oaxis()

    # closed-form limits
    approx(oaxis.two_mode_variance(1e4, 0.0, 0.3), 1.0, 1e-12)
    approx(oaxis.two_mode_variance(1e4, 1e-3, 0.0), 1.0, 1e-12)
    approx(oaxis.two_mode_jx_variance(1e4, 0.0), 1e4, 1e-6)

    # small-twisting closed form tracks the exact one
    v_exact = oaxis.two_mode_variance(1e4, 1e-4, 0.1)
    v_small = oaxis.two_mode_variance_small_lambda(1e4, 1e-4, 0.1)
    approx(v_exact, v_small, 1e-3 * abs(v_exact))

    # optimum scales like N^(-2/3)
    lam, theta, v = oaxis.optimal_squeezing(1e5)
    scale = 1e5 ** (-2.0 / 3.0)
    assert 0.45 * scale < lam < 0.75 * scale, lam
    assert 0.75 * scale < v < 1.25 * scale, v
    assert 0.0 < theta < math.pi

    # exact reference state agrees with the closed form
    oracle = oaxis.FockOracle(40.0, 1e-3, 1e-3)
    approx(oracle.normalized_variance(0.2), oaxis.two_mode_variance(40.0, 1e-3, 0.2), 1e-9)
    mean, var = oracle.difference_stats(0.0, 0.0)
    approx(mean, 0.0, 1e-9)
    approx(var, 40.0, 1e-6)
    jx, v2jx = oracle.jx_stats()
    assert v2jx > 40.0
    approx(oracle.n_total, 40.0, 1e-9)

    # revival detection on a synthetic collapse/revival trace
    times = [i * 1e-4 for i in range(200)]
    qs = [0.99 + 0.01 * math.cos(2 * math.pi * t / 1.5e-2) for t in times]
    approx(oaxis.detect_t_pi(times, qs), 1.5e-2, 2e-4)

    # presets validate and round-trip through JSON
    cfg = json.loads(oaxis.preset("ci-small"))
    assert cfg["physics"]["n_atoms"] == 1e4
    oaxis.validate_config(json.dumps(cfg))
    try:
        oaxis.validate_config('{"mode": "tw"}')
    except ValueError:
        pass
    else:
        sys.exit("invalid config was accepted")

    # a tiny end-to-end run through the pipeline
    cfg["mode"] = "twomode"
    cfg["twomode"] = {"lambda": 1e-3}
    out = Path(tempfile.mkdtemp(prefix="oaxis_run_"))
    manifest = json.loads(oaxis.run_experiment(json.dumps(cfg), str(out)))
    run_dir = Path(manifest["run_dir"])
    assert (run_dir / "manifest.json").exists()
    assert any(f["path"] == "summary.json" for f in manifest["files"])

    print("smoke test passed")


if __name__ == "__main__":
    main()
