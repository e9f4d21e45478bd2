"""ETPA prediction and enhancement bound, and how they move with the inputs.

Prints the full prediction for the bundled config, then the bound for a few
alternative choices: the Gaussian focal integral instead of the configured
one, the photon flux in the enhancement factor, and the computed instead of
the measured detection threshold.

    python3 scripts/enhancement_chain.py
"""

import argparse

from etpa import pipeline
from etpa.config import load_config, with_overrides


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config", default=None)
    args = ap.parse_args()

    cfg = load_config(args.config)
    print(pipeline.run_predict(cfg).to_human())

    variants = {
        "as configured": cfg,
        "Gaussian focal integral": with_overrides(cfg, "beam", focal_integral_per_m=None),
        "QEF from photon flux": with_overrides(cfg, "prediction", qef_flux="photon"),
        "computed threshold": with_overrides(cfg, "threshold", measured_per_s=None),
    }
    print(f"{'variant':26s} {'ETPA rate [1/s]':>18s} {'bound':>20s}")
    for name, c in variants.items():
        r = pipeline.run_bound(c)
        print(f"{name:26s} {r['etpa_rate']:10.3e} +- {r.err('etpa_rate'):.1e} "
              f"{r['bound']:10.3e} +- {r.err('bound'):.1e}")


if __name__ == "__main__":
    main()
