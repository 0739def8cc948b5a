"""Evaluate one head configuration on the synthetic shape data.

    python scripts/run_toy_eval.py --episodes 500 --shots 1
"""

import argparse
import time

from dbrn.episodes import evaluate, format_reports, generate_toy_dataset
from dbrn.head import HeadConfig


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--episodes", type=int, default=500)
    ap.add_argument("--shots", type=int, default=1)
    ap.add_argument("--way", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--k", type=int, default=3)
    ap.add_argument("--tau", type=float, default=10.0)
    ap.add_argument("--omega", type=float, default=2.0)
    ap.add_argument("--no-protoaug", action="store_true")
    args = ap.parse_args()

    data = generate_toy_dataset(seed=0)
    cfg = HeadConfig(k=args.k, tau=args.tau, omega=args.omega,
                     use_protoaug=not args.no_protoaug)
    t0 = time.perf_counter()
    report = evaluate(data, cfg, n_way=args.way, k_shot=args.shots,
                      num_episodes=args.episodes, seed=args.seed)
    print(format_reports([report]), end="")
    print(f"# {time.perf_counter() - t0:.1f}s, chance = {1 / args.way:.3f}")


if __name__ == "__main__":
    main()
