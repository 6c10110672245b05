#!/usr/bin/env python3
"""Write a seeded random weight bundle for exercising the inference paths.

Usage: python scripts/generate_fixture_weights.py out.dasrw [--seed 0] [--experts 5]
"""

import argparse

from degrade_forge.weights_io import make_fixture_bundle, save_bundle


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("out")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--experts", type=int, default=5)
    args = parser.parse_args()
    bundle = make_fixture_bundle(seed=args.seed, n_experts=args.experts)
    save_bundle(args.out, bundle)
    print(f"wrote {args.out}: {bundle.bank.n} experts x {bundle.bank.param_count():,} params")


if __name__ == "__main__":
    main()
