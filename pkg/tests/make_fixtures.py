"""Regenerate the files under tests/data (deterministic; run from the repo root)."""
import json
import os
import sys

import numpy as np

sys.path.insert(0, os.path.dirname(__file__))
from synth import trl_set  # noqa: E402

from chiptrans.netcore import OnePortNetwork  # noqa: E402
from chiptrans.touchstone import TouchstoneOptions, save_touchstone  # noqa: E402

DATA = os.path.join(os.path.dirname(__file__), "data")


def trl_fixture(path, seed=2024):
    os.makedirs(path, exist_ok=True)
    d = trl_set(np.random.default_rng(seed))
    opts = TouchstoneOptions("GHz", "S", "RI", 50.0)
    save_touchstone(os.path.join(path, "thru.s2p"), d["thru"], opts)
    save_touchstone(os.path.join(path, "line.s2p"), d["line"], opts)
    save_touchstone(os.path.join(path, "reflect_p1.s1p"), OnePortNetwork(d["grid"], d["reflect1"]), opts)
    save_touchstone(os.path.join(path, "reflect_p2.s1p"), OnePortNetwork(d["grid"], d["reflect2"]), opts)
    save_touchstone(os.path.join(path, "dut_raw.s2p"), d["raw"], opts)
    save_touchstone(os.path.join(path, "dut_reference.s2p"), d["dut"], opts)
    with open(os.path.join(path, "gamma_reference.csv"), "w") as fh:
        fh.write(d["gamma"].to_csv())
    manifest = {
        "thru": "thru.s2p",
        "line": "line.s2p",
        "reflect": ["reflect_p1.s1p", "reflect_p2.s1p"],
        "delta_length": d["delta_length"],
        "reflect_kind": d["kind"],
    }
    with open(os.path.join(path, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def fit_params():
    # stripline transition parameters whose series match lands at the design frequency
    sets = {
        "stripline_fit_140ghz.json": {"c_pad": 30e-15, "z_via": 60.0, "tau_via": 1e-12},
        "stripline_fit_200ghz.json": {"c_pad": 30e-15, "z_via": 30.0, "tau_via": 1e-12},
        "gsg_example.json": {"z1": 50.0, "tau1": 0.5e-12, "z2": 70.0, "tau2": 2e-12},
    }
    for name, data in sets.items():
        with open(os.path.join(DATA, name), "w") as fh:
            json.dump(data, fh, indent=2, sort_keys=True)
            fh.write("\n")


if __name__ == "__main__":
    trl_fixture(os.path.join(DATA, "trl_synthetic"))
    fit_params()
