#!/usr/bin/env python3
"""Worked example: from a measured swapping fringe to a key-rate budget.

Given a measured swapping visibility (and its uncertainty), infer the
photon indistinguishability at the swapping operating point, compare
against the full-overlap prediction, and print the secret-key fraction
for the measured error budget.
"""

import argparse
import sys

from swapsim.analysis import (
    chsh_parameter,
    fidelity_from_visibility,
    infer_zeta,
    key_rate_from_visibility,
    secret_key_fraction,
    swap_visibility,
)
from swapsim.experiments import SWAP_OPERATING_POINT, InterferenceParams


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--visibility", type=float, default=0.831)
    parser.add_argument("--sigma", type=float, default=0.055)
    parser.add_argument("--kappa", type=float, default=1.22)
    parser.add_argument("--e-t", type=float, default=0.011, dest="e_t")
    parser.add_argument("--e-p", type=float, default=0.079, dest="e_p")
    args = parser.parse_args()

    src = SWAP_OPERATING_POINT
    ideal = swap_visibility(src, InterferenceParams(zeta=1.0))
    print(f"predicted V at full overlap: {ideal.value:.4f} "
          f"(fidelity {fidelity_from_visibility(ideal.value):.4f})")

    z2, z2_err = infer_zeta(args.visibility, args.sigma, "SWAP", src)
    print(f"measured V = {args.visibility:.4f} +- {args.sigma:.4f}"
          f"  ->  zeta_sq = {z2:.4f} +- {z2_err:.4f}")

    chsh = chsh_parameter(args.visibility, args.sigma)
    verdict = "violates" if chsh.violation else "does not violate"
    print(f"CHSH S = {chsh.s:.3f} ({verdict} the classical bound, "
          f"{chsh.sigma_distance:.2f} sigma)")

    budget = secret_key_fraction(args.kappa, args.e_t, args.e_p)
    print(f"measured-budget key fraction: {budget.key_fraction:.4f}")
    model = key_rate_from_visibility(ideal.value)
    print(f"full-overlap model bound:     {model.key_fraction:.4f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
