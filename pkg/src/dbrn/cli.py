"""Command-line entry point: ``dbrn <command> [flags]``.

Settings resolve as: built-in defaults, then ``DBRN_SEED`` for the episode
seed, then ``--config FILE``, then explicit flags.
"""

import argparse
import os
import sys
from dataclasses import fields, replace

from .config import RunConfig, coerce_values, format_config, load_config
from .episodes import (
    FeatureCache,
    ablation_run,
    episode_logits,
    episode_seed,
    evaluate,
    format_reports,
    generate_toy_dataset,
    load_dataset,
    sample_episode,
    save_image_dataset,
)
from .errors import DBRNError
from .extractor import extract, resize_image, save_features
from .head import compute_prototype, fit_tau, rectify_weights
from .heatmap import render_weight_heatmap
from .pnm import read_pnm


class UsageError(Exception):
    pass


def _flag(name):
    return "--" + name.replace("_", "-")


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat 'key = value' file; flags override it")
    defaults = RunConfig()
    for f in fields(RunConfig):
        if f.name == "command":
            continue
        default = getattr(defaults, f.name)
        if isinstance(default, bool):
            name = f.name.removeprefix("use_")
            common.add_argument(_flag(name), dest=f.name, action=argparse.BooleanOptionalAction,
                                default=argparse.SUPPRESS, help=f"(default: {default})")
        else:
            common.add_argument(_flag(f.name), dest=f.name, type=type(default),
                                default=argparse.SUPPRESS, help=f"(default: {default!r})")
    parser = argparse.ArgumentParser(prog="dbrn", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("gen-data", parents=[common], help="write the synthetic shape dataset")
    sub.add_parser("extract", parents=[common], help="dump base-scale features to DBRNFT01")
    sub.add_parser("eval", parents=[common], help="episodic evaluation")
    sub.add_parser("ablate", parents=[common], help="four-row toggle ablation")
    sub.add_parser("fit-tau", parents=[common], help="fit the temperature by gradient descent")
    hm = sub.add_parser("heatmap", parents=[common], help="render rectify weights as P5")
    hm.add_argument("--query", required=True, help="query image (P5/P6)")
    hm.add_argument("--support", required=True, nargs="+", help="support images of one class")
    return parser


def resolve_config(args):
    config = RunConfig(command=args.command)
    env_seed = os.environ.get("DBRN_SEED")
    if env_seed is not None:
        try:
            config = replace(config, seed=int(env_seed))
        except ValueError:
            raise UsageError(f"DBRN_SEED={env_seed!r} is not an integer") from None
    if getattr(args, "config", None):
        if not os.path.exists(args.config):
            raise UsageError(f"config file not found: {args.config}")
        try:
            config = load_config(args.config, config)
        except DBRNError as exc:
            raise UsageError(f"{args.config}: {exc}") from None
    given = {f.name: getattr(args, f.name) for f in fields(RunConfig)
             if f.name != "command" and hasattr(args, f.name)}
    return replace(config, **coerce_values(given))


def _dataset(config):
    if config.dataset == "toy":
        return generate_toy_dataset(config.data_seed, config.num_classes,
                                    config.samples_per_class, config.resolution)
    if not os.path.exists(config.dataset):
        raise UsageError(f"dataset not found: {config.dataset}")
    return load_dataset(config.dataset)


def _emit(text, config):
    if config.out:
        with open(config.out, "w") as f:
            f.write(text)
    sys.stdout.write(text)


def cmd_gen_data(config, args):
    if not config.out:
        raise UsageError("gen-data needs --out DIR")
    ds = generate_toy_dataset(config.data_seed, config.num_classes,
                              config.samples_per_class, config.resolution)
    save_image_dataset(ds, config.out)
    print(f"wrote {len(ds)} classes x {config.samples_per_class} images to {config.out}")


def cmd_extract(config, args):
    if not config.out:
        raise UsageError("extract needs --out FILE")
    ds = _dataset(config)
    base = config.scale_set().base
    ext = config.extractor()
    maps, labels = [], []
    for name, group in zip(ds.classes, ds.items):
        for img in group:
            maps.append(extract(resize_image(img, base), ext))
            labels.append(name)
    save_features(maps, config.out)
    with open(config.out + ".labels", "w") as f:
        f.write("".join(f"{lab}\n" for lab in labels))
    print(f"wrote {len(maps)} feature maps to {config.out}")


def _header(config):
    return "# config\n" + "".join(f"# {line}\n" for line in format_config(config).splitlines())


def cmd_eval(config, args):
    ds = _dataset(config)
    report = evaluate(ds, config.head(), config.scale_set(), config.extractor(),
                      config.n_way, config.k_shot, config.q_queries, config.episodes,
                      config.seed)
    _emit(_header(config) + format_reports([report]), config)


def cmd_ablate(config, args):
    ds = _dataset(config)
    reports = ablation_run(ds, config.head(), config.episodes, config.seed,
                           config.scale_set(), config.extractor(),
                           config.n_way, config.k_shot, config.q_queries)
    _emit(_header(config) + format_reports(reports), config)


def cmd_fit_tau(config, args):
    ds = _dataset(config)
    unit = replace(config.head(), tau=1.0)
    cache = FeatureCache(ds, config.extractor(), config.scale_set())
    episodes = []
    for e in range(config.episodes):
        ep = sample_episode(ds, config.n_way, config.k_shot, config.q_queries,
                            episode_seed(config.seed, e))
        episodes.append((episode_logits(ep, cache, unit), ep.query_labels))
    tau, trace = fit_tau(episodes, config.lr, config.steps, config.tau)
    lines = [f"tau_initial = {config.tau!r}", f"tau = {tau!r}"]
    lines += [f"loss[{i}] = {loss!r}" for i, loss in enumerate(trace)]
    _emit(_header(config) + "\n".join(lines) + "\n", config)


def cmd_heatmap(config, args):
    if not config.out:
        raise UsageError("heatmap needs --out FILE.pgm")
    for p in [args.query, *args.support]:
        if not os.path.exists(p):
            raise UsageError(f"image not found: {p}")
    base = config.scale_set().base
    ext = config.extractor()
    query = read_pnm(args.query)
    qmap = extract(resize_image(query, base), ext)
    proto = compute_prototype([extract(resize_image(read_pnm(p), base), ext)
                               for p in args.support])
    weights = rectify_weights(qmap, proto, config.omega, config.use_pow)
    render_weight_heatmap(query, weights, (qmap.w, qmap.h), config.out)
    print("weights = " + " ".join(f"{w:.4f}" for w in weights.values))


HANDLERS = {
    "gen-data": cmd_gen_data,
    "extract": cmd_extract,
    "eval": cmd_eval,
    "ablate": cmd_ablate,
    "fit-tau": cmd_fit_tau,
    "heatmap": cmd_heatmap,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = resolve_config(args)
        HANDLERS[args.command](config, args)
    except UsageError as exc:
        print(f"dbrn: usage error: {exc}", file=sys.stderr)
        return 2
    except (DBRNError, OSError) as exc:
        print(f"dbrn: error: {exc}", file=sys.stderr)
        return 1
    return 0

if __name__ == "__main__":
    sys.exit(main())
