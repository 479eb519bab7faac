"""Regenerate the files under fixtures/ (deterministic, seed 0)."""

from pathlib import Path

import numpy as np

from gsh import kernel, spaces, structural, weights
from gsh.fields import CoefficientField, dump_json

OUT = Path(__file__).resolve().parent.parent / "fixtures"
DEMO_BOX = 64


def main():
    OUT.mkdir(exist_ok=True)
    sequences = {
        "gevrey1": weights.gevrey(1.0, p_max=10_000),
        "gevrey2": weights.gevrey(2.0, p_max=10_000),
        "gevrey_half": weights.gevrey(0.5, p_max=10_000),
        "power_log_1_0": weights.power_log(1.0, 0.0, p_max=10_000),
        "power_log_1_1": weights.power_log(1.0, 1.0, p_max=10_000),
        "power_log_half_1": weights.power_log(0.5, 1.0, p_max=10_000),
        "exp_power_2": weights.exp_power(2.0, p_max=200),
    }
    for name, seq in sequences.items():
        dump_json(seq.to_spec(), OUT / f"{name}.json")
    p = np.arange(401)
    dump_json({"family": "custom", "params": {"log_values": (0.5 * p * np.log(np.maximum(p, 1))).tolist()}},
              OUT / "sqrt_factorial_table.json")
    rho = np.geomspace(1.0, 1e6, 200)
    dump_json({"family": "from_weight_table", "params": {"table": np.c_[rho, np.log(rho) ** 2].tolist()}, "p_max": 24},
              OUT / "log_squared_table.json")

    dump_json(kernel.identity_kernel((8,)).to_json(), OUT / "identity_8.json")
    dump_json(kernel.fourier_kernel((8,)).to_json(), OUT / "fourier_8.json")

    seq = sequences["gevrey1"]
    rng = np.random.default_rng(0)
    env = spaces.envelope(seq, 1.0, (DEMO_BOX,))
    b = CoefficientField(np.exp(env), "dual")
    phi = CoefficientField((rng.standard_normal(DEMO_BOX) + 1j * rng.standard_normal(DEMO_BOX)) * np.exp(-env))
    dump_json(b.to_json(), OUT / "demo_dual.json")
    dump_json(phi.to_json(), OUT / "demo_test.json")
    dump_json(structural.regularize(b, seq, 1.0).to_json(), OUT / "demo_f.json")


if __name__ == "__main__":
    main()
