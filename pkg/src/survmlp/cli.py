"""Command-line surface: synth, train, predict, eval, ablate-epsilon.

Every command is deterministic given its flags; all randomness flows from
--seed. Commands exit 0 only when the requested artifact was fully produced,
and delete partially written outputs on failure.
"""

import argparse
import os
import sys
import time as _time

import numpy as np

from .data import Dataset, SynthSpec, load_csv, save_csv, split, synth_exponential
from .metrics import c_index_antolini, c_index_literal
from .model import survival_matrix
from .serialize import ModelBundle, load_model, save_model
from .timegrid import build_grid
from .training import TrainConfig, train


def _float_list(text):
    return [float(v) for v in text.split(",") if v != ""]


def _int_list(text):
    return [int(v) for v in text.split(",") if v != ""]


def _add_train_flags(p, required=True, include_epsilon=True):
    if include_epsilon:
        p.add_argument("--epsilon", type=float, default=1.0, help="training grid spacing")
    p.add_argument("--tmax", type=float, required=required,
                   help="grid horizon (>= every observed time)")
    p.add_argument("--lr", type=float, default=1e-4)
    p.add_argument("--wd", type=float, default=1e-4, help="decoupled weight decay")
    p.add_argument("--batch", type=int, default=64)
    p.add_argument("--epochs", type=int, required=required)
    p.add_argument("--encoder-widths", type=_int_list, default=[256, 512, 256],
                   help="comma-separated encoder layer widths; last is the embedding dim")
    p.add_argument("--head-widths", type=_int_list, default=[256, 256, 1],
                   help="comma-separated head layer widths; last must be 1")
    p.add_argument("--activation", choices=["relu", "sigmoid"], default="relu")


def _train_config(args):
    return TrainConfig(
        epochs=args.epochs,
        t_max=args.tmax,
        epsilon_train=args.epsilon,
        learning_rate=args.lr,
        weight_decay=args.wd,
        batch_size=args.batch,
        seed=args.seed,
        encoder_widths=tuple(args.encoder_widths),
        head_widths=tuple(args.head_widths),
        hidden_activation=args.activation,
    )


def _config_echo(config):
    return (
        f"epochs={config.epochs} epsilon_train={config.epsilon_train} t_max={config.t_max} "
        f"learning_rate={config.learning_rate} weight_decay={config.weight_decay} "
        f"batch_size={config.batch_size} seed={config.seed} "
        f"encoder_widths={','.join(str(w) for w in config.encoder_widths)} "
        f"head_widths={','.join(str(w) for w in config.head_widths)} "
        f"hidden_activation={config.hidden_activation}"
    )


def cmd_synth(args, outputs):
    spec = SynthSpec(
        n=args.n,
        covariate_dim=args.dim,
        rate_weights=np.asarray(args.weights if args.weights else [0.5] * args.dim),
        censor_horizon=args.censor_horizon,
        seed=args.seed,
    )
    dataset, _ = synth_exponential(spec)
    outputs.append(args.out)
    save_csv(dataset, args.out)
    print(f"wrote {args.out}: n={len(dataset)} features={dataset.feature_dim} "
          f"censoring_rate={dataset.censoring_rate:.4f}")
    return 0


def cmd_train(args, outputs):
    dataset = load_csv(args.data)
    print(f"loaded {args.data}: n={len(dataset)} features={dataset.feature_dim} "
          f"censoring_rate={dataset.censoring_rate:.4f}")
    config = _train_config(args)
    start = _time.time()
    params, history = train(dataset, config)
    elapsed = _time.time() - start
    outputs.append(args.out_model)
    save_model(args.out_model, ModelBundle(params=params, seed=args.seed, config_echo=_config_echo(config)))
    final = history[-1] if history else float("nan")
    print(f"trained {config.epochs} epochs in {elapsed:.1f}s, final epoch loss {final:.6f}")
    print(f"wrote {args.out_model}")
    return 0


def cmd_predict(args, outputs):
    bundle = load_model(args.model)
    dataset = load_csv(args.data)
    if dataset.feature_dim != bundle.params.feature_dim:
        raise ValueError(
            f"feature dim mismatch: model {bundle.params.feature_dim}, data {dataset.feature_dim}"
        )
    eps = args.epsilon_infer if args.epsilon_infer is not None else bundle.params.epsilon_train
    grid = build_grid(bundle.params.t_max, eps)
    s = survival_matrix(bundle.params, dataset.X, grid)
    outputs.append(args.out_curves)
    with open(args.out_curves, "w", encoding="utf-8") as fh:
        fh.write("id," + ",".join(f"S@{t:.10g}" for t in grid.points) + "\n")
        for i in range(s.shape[0]):
            fh.write(str(i) + "," + ",".join(repr(float(v)) for v in s[i]) + "\n")
    print(f"wrote {args.out_curves}: {s.shape[0]} curves on {grid.k + 1} grid points "
          f"(epsilon={eps:g}, t_max={bundle.params.t_max:g})")
    return 0


def _report_ci(results):
    parts = []
    for res in results:
        label = f"ci_{res.variant}"
        if res.value is None:
            print(f"warning: {label} undefined (no comparable pairs)")
            parts.append(f"{label}=undefined")
        else:
            note = " (subsampled)" if res.sampled else ""
            print(f"{label} = {res.value:.6f} over {res.pairs} pairs, {res.ties} prediction ties{note}")
            parts.append(f"{label}={res.value:.6f}")
    if all(r.value is None for r in results):
        print("ci=undefined")
    print(" ".join(parts) + f" pairs={results[0].pairs}")


def _eval_once(params, dataset, eps_infer, metric, budget, seed):
    eps = eps_infer if eps_infer is not None else params.epsilon_train
    grid = build_grid(params.t_max, eps)
    s = survival_matrix(params, dataset.X, grid)
    out = []
    if metric in ("literal", "both"):
        out.append(c_index_literal(s, dataset, grid, pair_budget=budget, seed=seed))
    if metric in ("antolini", "both"):
        out.append(c_index_antolini(s, dataset, grid, pair_budget=budget, seed=seed))
    return out


def cmd_eval(args, outputs):
    dataset = load_csv(args.data)
    if args.kfold:
        from .data import k_fold

        if args.epochs is None or args.tmax is None:
            raise ValueError("--kfold needs --epochs and --tmax to train per fold")
        folds = k_fold(dataset, args.kfold, args.seed)
        config = _train_config(args)
        per_variant = {}
        for f, test_fold in enumerate(folds):
            rest = [fold for g, fold in enumerate(folds) if g != f]
            train_set = Dataset(
                np.concatenate([fold.X for fold in rest]),
                np.concatenate([fold.time for fold in rest]),
                np.concatenate([fold.event for fold in rest]),
                dataset.feature_names,
            )
            params, _ = train(train_set, config)
            results = _eval_once(params, test_fold, args.epsilon_infer, args.metric,
                                 args.pair_budget, args.seed)
            for res in results:
                per_variant.setdefault(res.variant, []).append(res)
                val = "undefined" if res.value is None else f"{res.value:.6f}"
                print(f"fold {f}: ci_{res.variant}={val} pairs={res.pairs}")
        for variant, rs in per_variant.items():
            defined = [r for r in rs if r.value is not None]
            if not defined:
                print(f"ci_{variant}: undefined in all folds")
                continue
            mean = np.mean([r.value for r in defined])
            pooled = sum(r.value * r.pairs for r in defined) / sum(r.pairs for r in defined)
            print(f"ci_{variant}_mean={mean:.6f} ci_{variant}_pooled={pooled:.6f}")
        return 0

    if not args.model:
        raise ValueError("--model is required unless --kfold is given")
    bundle = load_model(args.model)
    if dataset.feature_dim != bundle.params.feature_dim:
        raise ValueError(
            f"feature dim mismatch: model {bundle.params.feature_dim}, data {dataset.feature_dim}"
        )
    results = _eval_once(bundle.params, dataset, args.epsilon_infer, args.metric,
                         args.pair_budget, args.seed)
    _report_ci(results)
    return 0


def cmd_ablate(args, outputs):
    dataset = load_csv(args.data)
    train_set, test_set = split(dataset, args.test_fraction, args.seed)
    ci_fn = c_index_literal if args.metric == "literal" else c_index_antolini
    rows = []
    for train_eps in args.train_eps:
        config = TrainConfig(
            epochs=args.epochs,
            t_max=args.tmax,
            epsilon_train=train_eps,
            learning_rate=args.lr,
            weight_decay=args.wd,
            batch_size=args.batch,
            seed=args.seed,
            encoder_widths=tuple(args.encoder_widths),
            head_widths=tuple(args.head_widths),
            hidden_activation=args.activation,
        )
        params, _ = train(train_set, config)
        row = []
        for infer_eps in args.infer_eps:
            grid = build_grid(args.tmax, infer_eps)
            res = ci_fn(params, test_set, grid, pair_budget=args.pair_budget, seed=args.seed)
            row.append(res.value if res.value is not None else float("nan"))
        rows.append(row)
        print(f"train_eps={train_eps:g}: " + " ".join(f"{v:.4f}" for v in row))
    header = "train_epsilon," + ",".join(f"{e:.10g}" for e in args.infer_eps)
    lines = [header] + [
        f"{e:.10g}," + ",".join(f"{v:.6f}" for v in row) for e, row in zip(args.train_eps, rows)
    ]
    text = "\n".join(lines) + "\n"
    if args.out:
        outputs.append(args.out)
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="survmlp", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate exponential synthetic survival data")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--weights", type=_float_list, default=None,
                   help="comma-separated rate weights, default 0.5 each")
    p.add_argument("--censor-horizon", type=float, default=4.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("train", help="fit a hazard model on a dataset CSV")
    p.add_argument("--data", required=True)
    _add_train_flags(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-model", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="write survival curves for every sample")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--epsilon-infer", type=float, default=None,
                   help="inference grid spacing, default: model's training spacing")
    p.add_argument("--out-curves", required=True)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("eval", help="concordance of a model (or k-fold train+eval) on a CSV")
    p.add_argument("--model", default=None)
    p.add_argument("--data", required=True)
    p.add_argument("--metric", choices=["literal", "antolini", "both"], default="both")
    p.add_argument("--epsilon-infer", type=float, default=None)
    p.add_argument("--pair-budget", type=int, default=100_000)
    p.add_argument("--kfold", type=int, default=None,
                   help="train/eval across k folds instead of using --model")
    p.add_argument("--seed", type=int, default=0)
    _add_train_flags(p, required=False)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("ablate-epsilon", help="CI matrix over training and inference spacings")
    p.add_argument("--data", required=True)
    p.add_argument("--train-eps", type=_float_list, required=True)
    p.add_argument("--infer-eps", type=_float_list, required=True)
    p.add_argument("--test-fraction", type=float, default=1.0 / 3.0)
    p.add_argument("--metric", choices=["literal", "antolini"], default="antolini")
    p.add_argument("--pair-budget", type=int, default=100_000)
    _add_train_flags(p, include_epsilon=False)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_ablate)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    outputs = []
    try:
        return args.func(args, outputs)
    except (ValueError, OSError) as exc:
        for path in outputs:
            if os.path.exists(path):
                os.remove(path)
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
