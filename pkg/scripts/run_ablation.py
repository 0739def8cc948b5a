"""Paired four-row toggle ablation on the synthetic shape data.

All rows share one episode stream, so row differences are paired.
"""

import argparse

import numpy as np

from dbrn.episodes import ablation_run, generate_toy_dataset
from dbrn.head import HeadConfig


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--episodes", type=int, default=1000)
    ap.add_argument("--shots", type=int, nargs="+", default=[1, 5])
    ap.add_argument("--seed", type=int, default=6)
    args = ap.parse_args()

    data = generate_toy_dataset(seed=0)
    for shots in args.shots:
        rows = ablation_run(data, HeadConfig(), num_episodes=args.episodes,
                            seed=args.seed, k_shot=shots)
        base = np.array(rows[0].accuracies)
        print(f"5-way {shots}-shot, {args.episodes} episodes")
        for r in rows:
            diff = np.array(r.accuracies) - base
            paired = 1.96 * diff.std() / np.sqrt(len(diff))
            print(f"  {r.label:<22} {100 * r.mean:6.2f} +/- {100 * r.ci95:.2f}"
                  f"   vs baseline {100 * diff.mean():+6.2f} +/- {100 * paired:.2f}")


if __name__ == "__main__":
    main()
