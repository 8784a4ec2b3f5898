"""Audit the single-letter reduction on random block codes.

Any block code, conditioned on the past state sequence, induces a product
policy over per-letter strategies. This script draws random encoder tables,
checks that the literal brute-force letter law matches the induced-policy
law everywhere, and compares each code's averaged sum bound with the
single-letter optimum (the code can never beat it).

Run:  python3 demos/converse_audit.py [seed]
"""

import sys

import numpy as np

from fsmac import (
    alpha_sigma_weights,
    induced_strategy_channel,
    maximize_sum_rate,
    random_encoders,
    sigma_average_pentagon,
    verify_factorization,
)
from fsmac.examples import load
from fsmac.rng import ROLE_ENCODER, stream


def main() -> None:
    seed = int(sys.argv[1]) if len(sys.argv) > 1 else 0
    spec = load("mod2-adder-noiseless")
    chan = induced_strategy_channel(spec)
    optimum = maximize_sum_rate(spec, chan).value
    print(f"single-letter sum-rate optimum: {optimum:.6f} bits")

    n = 3
    weights = alpha_sigma_weights(spec, n)
    print(f"blocklength {n}: {len(weights)} past-state classes, "
          f"weights sum to {sum(weights.values()):.3f}")

    print(f"\n{'code':>4} {'max factorization dev':>22} {'avg sum bound':>14}")
    for trial in range(8):
        maps = random_encoders(spec, n, 2, 2,
                               stream(seed, trial, ROLE_ENCODER))
        audit = verify_factorization(spec, maps, chan)
        pent = sigma_average_pentagon(spec, maps, chan)
        tag = "" if pent.bound_sum <= optimum + 1e-9 else "  <-- BOUND BROKEN"
        print(f"{trial:>4} {audit.max_deviation:>22.3e} "
              f"{pent.bound_sum:>14.6f}{tag}")
        if audit.max_deviation > 1e-9:
            print(f"     worst at t={audit.worst_t}, "
                  f"sigma='{audit.worst_sigma}'")

    print("\nEvery code's averaged bound sits at or below the optimum, and")
    print("the letter laws factorize to machine precision: the single-letter")
    print("expression really is an upper bound for block codes.")


if __name__ == "__main__":
    main()
