#!/usr/bin/env python3
"""Smoke test for the colwave_py extension module.

Builds nothing itself: run `cargo build -p colwave-py --release` first, then
`python3 python/smoke_test.py`. The script locates the compiled cdylib,
exposes it as an importable module and exercises one entry point per
subsystem.
"""

import math
import pathlib
import shutil
import sys
import sysconfig
import tempfile


def load_module():
    root = pathlib.Path(__file__).resolve().parent.parent
    candidates = [
        root / "target" / "release" / "libcolwave_py.so",
        root / "target" / "debug" / "libcolwave_py.so",
    ]
    lib = next((p for p in candidates if p.exists()), None)
    if lib is None:
        sys.exit("build the extension first: cargo build -p colwave-py --release")
    stage = pathlib.Path(tempfile.mkdtemp(prefix="colwave_py_"))
    suffix = sysconfig.get_config_var("EXT_SUFFIX") or ".so"
    shutil.copy(lib, stage / f"colwave_py{suffix}")
    sys.path.insert(0, str(stage))
    import colwave_py

    return colwave_py


def approx(a, b, tol):
    return abs(a - b) <= tol


def main():
    cw = load_module()
    checks = []

    def check(name, ok, detail=""):
        checks.append((name, ok))
        print(f"{'ok  ' if ok else 'FAIL'} {name} {detail}")

    # nets: exponent estimation recovers a pure power law
    grid = cw.EpsGrid(0.1, 6)
    sup = [e**-2 for e in grid.values()]
    exponent, residual = cw.estimate_order(sup, grid)
    check("estimate_order", approx(exponent, 2.0, 1e-10) and residual < 1e-10,
          f"exponent={exponent:.12f}")

    # nets: mollified delta pairs towards phi(x0)
    phi = cw.TestFunction.gaussian([3.1], 0.3)
    pairings = cw.embed_delta_and_pair(3.0, 2 * math.pi, 8192, grid, phi)
    target = phi.eval([3.0])
    check("mollifier_embed", abs(pairings[-1] - target) < 1e-3,
          f"final pairing {pairings[-1]:.6f} vs {target:.6f}")

    # riesz: exact constant, delta property, recursion
    check("riesz_constant", cw.riesz_constant(2.0, 2) == 0.5
          and cw.riesz_constant(2.0, 4) == 0.0)
    phi2 = cw.TestFunction.gaussian([0.3, 0.1], 0.4)
    delta_val = cw.riesz_pair(0.0, 2, phi2)
    check("riesz_delta", approx(delta_val, phi2.eval([0.0, 0.0]), 1e-6),
          f"pairing {delta_val:.9f}")
    check("riesz_recursion", cw.riesz_recursion_deviation(2.0, 2) < 1e-6)

    # riesz: flat Hadamard coefficient stays at one
    check("hadamard_v0", cw.hadamard_flat_deviation(2, 0.5) < 1e-8)

    # solver: standing wave against the closed form, and the oracle itself
    check("solver", cw.standing_wave_error(512, 1.0) < 5e-4)
    u0 = [math.sin(2 * math.pi * i / 512) for i in range(512)]
    u1 = [0.0] * 512
    v = cw.dalembert_oracle(u0, u1, 2 * math.pi, 0.7, 1.3, 1.0)
    check("dalembert_oracle", approx(v, math.sin(1.3) * math.cos(0.7), 1e-5))

    # scenario runner end to end (trimmed for speed)
    names = [n for n, _ in cw.list_scenarios()]
    check("list_scenarios", len(names) >= 8 and "minkowski_standing_wave" in names)
    verdicts = cw.run_scenario("minkowski_standing_wave", eps_count=4, resolution=256)
    check("run_scenario", all(verdicts.values()), str(verdicts))

    failed = [n for n, ok in checks if not ok]
    if failed:
        sys.exit(f"smoke test failed: {failed}")
    print(f"\nall {len(checks)} smoke checks passed")


if __name__ == "__main__":
    main()
