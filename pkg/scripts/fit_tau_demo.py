"""Fit the temperature on toy episodes and print the loss trace."""

import argparse

from dbrn.episodes import FeatureCache, episode_logits, episode_seed, generate_toy_dataset, sample_episode
from dbrn.head import HeadConfig, fit_tau


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--episodes", type=int, default=50)
    ap.add_argument("--lr", type=float, default=0.5)
    ap.add_argument("--steps", type=int, default=50)
    ap.add_argument("--tau", type=float, default=10.0)
    args = ap.parse_args()

    data = generate_toy_dataset(seed=0)
    cache = FeatureCache(data)
    # logits are linear in tau, so compute them once at tau = 1
    unit = HeadConfig(tau=1.0, use_protoaug=False)
    episodes = []
    for e in range(args.episodes):
        ep = sample_episode(data, rng_seed=episode_seed(0, e))
        episodes.append((episode_logits(ep, cache, unit), ep.query_labels))
    tau, trace = fit_tau(episodes, args.lr, args.steps, tau=args.tau)
    for i in range(0, len(trace), max(1, args.steps // 10)):
        print(f"step {i:4d}  loss {trace[i]:.4f}")
    print(f"tau: {args.tau} -> {tau:.4f}   loss {trace[0]:.4f} -> {trace[-1]:.4f}")


if __name__ == "__main__":
    main()
