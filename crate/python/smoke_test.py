"""Smoke test for the duplex_diffusion extension module.

Build and install it first, for example:

    pip install --no-build-isolation ./crates/python     # needs maturin
    python python/smoke_test.py

Without an installed module the script falls back to a library built by
`cargo build --release -p duplex-diffusion-py`.
"""

import glob
import importlib
import json
import os
import shutil
import sys
import tempfile


def load_module():
    try:
        return importlib.import_module("duplex_diffusion")
    except ImportError:
        pass
    root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
    candidates = []
    for profile in ("release", "debug"):
        candidates += glob.glob(os.path.join(root, "target", profile, "libduplex_diffusion_py.so"))
        candidates += glob.glob(os.path.join(root, "target", profile, "libduplex_diffusion_py.dylib"))
    if not candidates:
        sys.exit("duplex_diffusion is not installed and no built library was found")
    staging = tempfile.mkdtemp()
    shutil.copy(candidates[0], os.path.join(staging, "duplex_diffusion.so"))
    sys.path.insert(0, staging)
    return importlib.import_module("duplex_diffusion")


def main():
    dd = load_module()

    net = dd.Network.complete(30)
    assert net.edge_count(1) == 870
    sw = dd.Network.small_world(30, clusters=5, k_out=5, p_rewire=0.1, seed=1)
    assert sw.edge_count(2) == 150

    pop = dd.Population.random(30, k=6, seed=7)
    sim = dd.Simulation(net, pop, alpha=1.0, seed=11)
    samples = sim.run(20_000, sample_every=5_000)
    final = samples[-1]
    print("alpha=1 after 20000 steps:", {k: final[k] for k in ("pref_similarity", "pref_congruence")})
    assert final["pref_similarity"] > 0.9

    config = json.dumps({
        "topology": "scale-free",
        "n": 30,
        "model": {"steps": 5_000},
        "alphas": [0.0, 0.5],
        "replicates": 2,
        "sample_every": 1_000,
    })
    rows = dd.run_sweep(config)
    assert len(rows) == 2 * 2 * 6
    assert rows == dd.run_sweep(config)
    print("sweep rows:", len(rows))

    assert abs(dd.pearson([1, 2, 3], [3, 2, 1]) + 1.0) < 1e-12
    print("ok")


if __name__ == "__main__":
    main()
