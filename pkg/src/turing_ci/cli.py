"""Command line entry point: simulate, ci, asymptotics, attribute, attribute-grid."""

from __future__ import annotations

import argparse
import csv
import io
import json
import secrets
import sys
from pathlib import Path

from . import __version__
from .asymptotics import ASYMPTOTICS_COLUMNS, asymptotics_table
from .attribution import TokenizerOptions, attribute_words, split_sample, tokenize_words
from .distributions import DiscretePareto, DynamicGeometric, DynamicUniform, FixedGeometric, RngStream, parse_spec
from .harness import FORMAT_VERSION, ExperimentConfig, log_grid, run_experiment
from .intervals import INTERVAL_COLUMNS, CIConfig, Method, build_interval
from .profile import SampleProfile, build_profile, sd_estimate, turing_estimate


class ParseError(ValueError):
    pass


def _version_line() -> str:
    return f"turing_ci {__version__} (csv format {FORMAT_VERSION})"


# -- value parsers (accept CLI strings or JSON config values) ----------------


def _number(text) -> float:
    return float(text)


def parse_int_list(value) -> list[int]:
    """``1e2,1e3``, ``0..3`` or ``1e2:1e5:8`` (8 log-spaced points); lists pass through."""
    if isinstance(value, (list, tuple)):
        return [int(float(v)) for v in value]
    if isinstance(value, (int, float)):
        return [int(value)]
    text = str(value).strip()
    if ".." in text:
        lo, hi = text.split("..")
        return list(range(int(lo), int(hi) + 1))
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"range {text!r} must be start:stop:count")
        return list(log_grid(float(parts[0]), float(parts[1]), int(parts[2])))
    return [int(float(t)) for t in text.split(",") if t.strip()]


def parse_methods(value) -> list[Method]:
    items = value if isinstance(value, (list, tuple)) else str(value).split(",")
    return [Method.parse(m) for m in items if str(m).strip()]


def _seed(value) -> tuple[int, bool]:
    if value is None:
        return secrets.randbits(63), True
    return int(value), False


# -- subcommands -------------------------------------------------------------


def cmd_simulate(args) -> int:
    seed, drawn = _seed(args.seed)
    if drawn:
        print(f"seed: {seed}", file=sys.stderr)
    config = ExperimentConfig(
        spec=parse_spec(args.dist),
        n_grid=tuple(parse_int_list(args.n)),
        r_values=tuple(parse_int_list(args.r)),
        methods=tuple(parse_methods(args.methods)),
        reps=int(args.reps),
        alpha=float(args.alpha),
        V=float(args.V),
        master_seed=seed,
        large_n_reps=None if args.large_n_reps is None else int(args.large_n_reps),
    )
    text = run_experiment(config, args.out, workers=int(args.workers))
    if args.out is None:
        sys.stdout.write(text)
    return 0


def read_sample_file(path) -> list[str]:
    """One token per line; blank lines are skipped."""
    tokens = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            token = line.strip()
            if not token:
                continue
            if len(token.split()) != 1:
                raise ParseError(f"{path}:{lineno}: expected one token per line, got {line.rstrip()!r}")
            tokens.append(token)
    if not tokens:
        raise ParseError(f"{path}: no tokens")
    return tokens


def parse_counts(text) -> SampleProfile:
    """``N1,N2,...`` -> profile with those occupancy counts."""
    items = text if isinstance(text, (list, tuple)) else str(text).split(",")
    occupancy = {}
    for pos, item in enumerate(items, start=1):
        try:
            value = int(str(item).strip())
        except ValueError:
            raise ParseError(f"--counts item {pos}: not an integer: {item!r}") from None
        if value < 0:
            raise ParseError(f"--counts item {pos}: negative count {value}")
        occupancy[pos] = value
    return SampleProfile.from_occupancy(occupancy)


def ci_once(profile: SampleProfile, r: int, method, alpha: float = 0.05, V: float = 2.0) -> dict:
    """Interval record for order ``r`` of ``profile``."""
    T = turing_estimate(profile, r)
    s_hat = sd_estimate(profile, r)
    iv = build_interval(method, T, s_hat, profile.occupancy_count(r + 1), profile.n, r, CIConfig(alpha, V))
    record = {"n": profile.n, "r": r, "alpha": alpha, "V": V, "T": T, "s_hat": s_hat}
    record.update(iv.as_row())
    return record


def cmd_ci(args) -> int:
    if (args.sample is None) == (args.counts is None):
        raise ParseError("give exactly one of --sample or --counts")
    profile = build_profile(read_sample_file(args.sample)) if args.sample else parse_counts(args.counts)
    record = ci_once(profile, int(args.r), args.method, float(args.alpha), float(args.V))
    if args.format == "json":
        print(json.dumps(record))
    else:
        cols = ["n", "r", "alpha", "V", "T", "s_hat", *INTERVAL_COLUMNS]
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
        writer.writeheader()
        writer.writerow(record)
        sys.stdout.write(buf.getvalue())
    return 0


def _asymptotics_spec(args):
    if args.dist:
        return parse_spec(args.dist)
    family = args.family
    if family == "dunif":
        return DynamicUniform(float(args.gamma))
    if family == "dgeom":
        return DynamicGeometric(float(args.c), float(args.beta))
    if family == "geom":
        return FixedGeometric(float(args.p))
    if family == "pareto":
        return DiscretePareto(float(args.pareto_alpha))
    raise ParseError("give --family or --dist")


def cmd_asymptotics(args) -> int:
    spec = _asymptotics_spec(args)
    rows = asymptotics_table(spec, int(args.r), parse_int_list(args.n))
    buf = io.StringIO()
    buf.write(f"# {_version_line()} dist={spec.text()} r={args.r}\n")
    writer = csv.DictWriter(buf, fieldnames=ASYMPTOTICS_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: format(v, ".9g") if isinstance(v, float) else v for k, v in row.items()})
    _emit(buf.getvalue(), args.out)
    return 0


def _emit(text: str, out) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def _tokenizer_options(args) -> TokenizerOptions:
    return TokenizerOptions(
        lowercase=not args.keep_case,
        strip_punctuation=not args.keep_punctuation,
        strip_urls=not args.keep_urls,
        drop_retweets=not args.keep_retweets,
    )


def _read_words(path, opts) -> list[str]:
    return tokenize_words(Path(path).read_text(encoding="utf-8"), opts)


def _report_text(report, out) -> str:
    if out is not None and str(out).endswith(".csv"):
        meta = " ".join(f"{k}={v}" for k, v in report.metadata.items())
        return f"# {meta}\n" + report.to_csv()
    return report.to_json() + "\n"


def cmd_attribute(args) -> int:
    opts = _tokenizer_options(args)
    corpus = _read_words(args.corpus, opts)
    meta = {"toolkit": _version_line(), "corpus": str(args.corpus), "alpha": args.alpha, "V": args.V, "method": str(args.method)}
    if args.self_split:
        seed, drawn = _seed(args.seed)
        if drawn:
            print(f"seed: {seed}", file=sys.stderr)
        corpus, testing = split_sample(corpus, RngStream(seed, 0))
        meta.update(testing="self-split", seed=seed)
    else:
        if args.testing is None:
            raise ParseError("--testing is required unless --self-split is given")
        testing = _read_words(args.testing, opts)
        meta["testing"] = str(args.testing)
    report = attribute_words(
        corpus, testing, None if args.R is None else int(args.R), args.method, float(args.alpha), float(args.V), float(args.threshold)
    )
    report.metadata.update(meta, R=report.R)
    _emit(_report_text(report, args.out), args.out)
    return 0


def cmd_attribute_grid(args) -> int:
    opts = _tokenizer_options(args)
    paths = [p.strip() for p in (args.inputs if isinstance(args.inputs, list) else str(args.inputs).split(",")) if p.strip()]
    if len(paths) < 1:
        raise ParseError("--inputs needs at least one file")
    seed, drawn = _seed(args.seed)
    if drawn:
        print(f"seed: {seed}", file=sys.stderr)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    words = [_read_words(p, opts) for p in paths]
    summary = ["corpus,testing,n1,n2,R,fraction_inside_excluding_r0,same_author"]
    for i, corpus_path in enumerate(paths):
        for j, testing_path in enumerate(paths):
            meta = {"toolkit": _version_line(), "corpus": corpus_path, "testing": testing_path, "seed": seed, "alpha": args.alpha, "V": args.V, "method": str(args.method)}
            if i == j:
                corpus, testing = split_sample(words[i], RngStream(seed, i))
                meta["testing"] = "self-split"
            else:
                corpus, testing = words[i], words[j]
            report = attribute_words(
                corpus, testing, None if args.R is None else int(args.R), args.method, float(args.alpha), float(args.V), float(args.threshold)
            )
            report.metadata.update(meta, R=report.R)
            name = f"{Path(corpus_path).stem}__vs__{Path(testing_path).stem}.json"
            (out / name).write_text(report.to_json() + "\n", encoding="utf-8")
            summary.append(
                f"{Path(corpus_path).stem},{Path(testing_path).stem},{report.n1},{report.n2},{report.R},"
                f"{report.fraction_inside_excluding_r0:.9g},{str(report.same_author).lower()}"
            )
    (out / "grid_summary.csv").write_text("\n".join(summary) + "\n", encoding="utf-8")
    return 0


# -- parser ------------------------------------------------------------------


def _add_tokenizer_flags(p):
    p.add_argument("--keep-case", action="store_true")
    p.add_argument("--keep-punctuation", action="store_true")
    p.add_argument("--keep-urls", action="store_true")
    p.add_argument("--keep-retweets", action="store_true")


def _add_attribution_flags(p):
    p.add_argument("--R", default=None, help="largest r (default: min(20, largest realized r-1))")
    p.add_argument("--method", default="normal")
    p.add_argument("--alpha", default=0.05, type=_number)
    p.add_argument("--V", default=2.0, type=_number)
    p.add_argument("--threshold", default=0.5, type=_number, help="decision cutoff on the fraction inside")
    p.add_argument("--seed", default=None)
    _add_tokenizer_flags(p)


def build_parser() -> tuple[argparse.ArgumentParser, dict[str, argparse.ArgumentParser]]:
    parser = argparse.ArgumentParser(prog="turing-ci", description=__doc__)
    parser.add_argument("--version", action="version", version=_version_line())
    sub = parser.add_subparsers(dest="command", required=True)
    subs = {}

    p = subs["simulate"] = sub.add_parser("simulate", help="Monte Carlo coverage study")
    p.add_argument("--dist", required=True, help="e.g. uniform:K=100, dunif:gamma=1.5, geom:p=0.5")
    p.add_argument("--n", required=True, help="list (100,1000), or log range start:stop:count")
    p.add_argument("--r", default="0..3")
    p.add_argument("--methods", default="normal,poisson,heuristic")
    p.add_argument("--reps", default=5000, type=int)
    p.add_argument("--large-n-reps", default=None, type=int, help="replications for n >= 1e7")
    p.add_argument("--alpha", default=0.05, type=_number)
    p.add_argument("--V", default=2.0, type=_number)
    p.add_argument("--seed", default=None)
    p.add_argument("--workers", default=1, type=int)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_simulate)

    p = subs["ci"] = sub.add_parser("ci", help="one interval from a sample file or occupancy counts")
    p.add_argument("--sample", default=None, help="file with one token per line")
    p.add_argument("--counts", default=None, help="N1,N2,... occupancy counts")
    p.add_argument("--r", default=0, type=int)
    p.add_argument("--method", default="normal")
    p.add_argument("--alpha", default=0.05, type=_number)
    p.add_argument("--V", default=2.0, type=_number)
    p.add_argument("--format", default="json", choices=["json", "csv"])
    p.set_defaults(func=cmd_ci)

    p = subs["asymptotics"] = sub.add_parser("asymptotics", help="regime classification and ratio bands")
    p.add_argument("--family", choices=["dunif", "dgeom", "geom", "pareto"], default=None)
    p.add_argument("--dist", default=None, help="text form instead of --family/params")
    p.add_argument("--gamma", default=None)
    p.add_argument("--c", default=0.25)
    p.add_argument("--beta", default=0.5)
    p.add_argument("--p", default=None)
    p.add_argument("--alpha", dest="pareto_alpha", default=None, help="Pareto index")
    p.add_argument("--r", default=0, type=int)
    p.add_argument("--n", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_asymptotics)

    p = subs["attribute"] = sub.add_parser("attribute", help="compare a testing text against a corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--testing", default=None)
    p.add_argument("--self-split", action="store_true")
    p.add_argument("--out", default=None, help=".json or .csv")
    _add_attribution_flags(p)
    p.set_defaults(func=cmd_attribute)

    p = subs["attribute-grid"] = sub.add_parser("attribute-grid", help="all ordered pairs of several texts")
    p.add_argument("--inputs", required=True, help="comma-separated text files")
    p.add_argument("--out", required=True, help="output directory")
    _add_attribution_flags(p)
    p.set_defaults(func=cmd_attribute_grid)

    for p in subs.values():
        p.add_argument("--config", default=None, help="JSON file supplying any flag; flags override it")
    return parser, subs


def _apply_config(argv: list[str], parser, subs) -> argparse.Namespace:
    """Parse ``argv``; a ``--config`` JSON body becomes subcommand defaults first."""
    command = next((tok for tok in argv if tok in subs), None)
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config", default=None)
    config_path = pre.parse_known_args(argv)[0].config
    if command is None or not config_path:
        return parser.parse_args(argv)
    with open(config_path, encoding="utf-8") as fh:
        body = json.load(fh)
    if not isinstance(body, dict):
        raise ParseError(f"{config_path}: config must be a JSON object")
    sub = subs[command]
    known = {a.dest for a in sub._actions}
    defaults = {}
    for key, value in body.items():
        dest = key.lstrip("-").replace("-", "_")
        if dest == "alpha" and command == "asymptotics":
            dest = "pareto_alpha"
        if dest not in known or dest in ("config", "help"):
            raise ParseError(f"{config_path}: unknown key {key!r} for {command}")
        defaults[dest] = value
    sub.set_defaults(**defaults)
    # required flags may come from the file
    for action in sub._actions:
        if action.dest in defaults:
            action.required = False
    return parser.parse_args(argv)


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser, subs = build_parser()
    try:
        args = _apply_config(argv, parser, subs)
        return args.func(args)
    except SystemExit as exc:
        return int(exc.code or 0)
    except ParseError as exc:
        print(f"error: parse: {exc}", file=sys.stderr)
        return 1
    except (ValueError, ArithmeticError) as exc:
        print(f"error: value: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: io: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
