"""Command-line front door.

Every subcommand validates its flags before touching data, writes
machine-readable output atomically (temp file + rename), and embeds a
provenance header so runs are reproducible byte-for-byte.

Exit codes: 0 success, 1 validation error, 2 I/O or format error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import blend, cca, convert, evalmetrics, geometry
from .embedstore import (
    EmbeddingFormatError,
    SpaceMeta,
    load_dataset,
    read_embedding_file,
    write_embedding_file,
)

PSEUDO_RATIO_NOTE = "pseudo_ratio = d1 / (d1 + d2)"
SPEARMAN_NOTE = ("spearman domain = union of the two ell-NN sets, "
                 "global ranks with average ties")


class _UsageError(Exception):
    """Flag/validation failure surfaced as exit code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _manifest_sha256(dataset_dir) -> str:
    data = (Path(dataset_dir) / "manifest.json").read_bytes()
    return hashlib.sha256(data).hexdigest()


def _provenance(args, dataset_dir=None, notes=()):
    # threads is a scheduling hint only; keeping it out of the header
    # preserves byte-identical outputs at any worker count
    flags = {
        k: v for k, v in sorted(vars(args).items())
        if k not in ("func", "threads") and v is not None
    }
    prov = {
        "tool": "embedblend",
        "version": __version__,
        "flags": {k: str(v) for k, v in flags.items()},
    }
    if dataset_dir is not None:
        prov["manifest_sha256"] = _manifest_sha256(dataset_dir)
    if notes:
        prov["conventions"] = list(notes)
    return prov


def _provenance_comment_lines(prov) -> list[str]:
    lines = [f"# tool=embedblend version={prov['version']}"]
    flags = " ".join(f"{k}={v}" for k, v in sorted(prov["flags"].items()))
    lines.append(f"# flags: {flags}")
    if "manifest_sha256" in prov:
        lines.append(f"# manifest_sha256={prov['manifest_sha256']}")
    for note in prov.get("conventions", ()):
        lines.append(f"# convention: {note}")
    return lines


def _write_text_atomic(path, text: str) -> None:
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w", encoding="utf-8", newline="\n") as f:
        f.write(text)
    os.replace(tmp, path)


def _write_json_atomic(path, obj) -> None:
    _write_text_atomic(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _load_pooled_queries(path, dim):
    values, t, d = read_embedding_file(path)
    if t != 1:
        raise _UsageError(f"{path}: expected pooled queries (T=1), got T={t}")
    if d != dim:
        raise _UsageError(f"{path}: query dim {d} != dataset dim {dim}")
    return values[:, 0, :].astype(np.float64)


def _fmt(x: float) -> str:
    return f"{x:.6g}"


def _cmd_interpolate(args) -> int:
    dataset = load_dataset(args.dataset)
    with open(args.pairs, encoding="utf-8") as f:
        pairs = json.load(f)
    if not isinstance(pairs, list) or not pairs:
        raise _UsageError(f"{args.pairs}: expected a nonempty array of pairs")
    if args.space == "pooled":
        source = dataset.pooled[:, None, :]
        meta = dataset.meta_pooled
    else:
        source = dataset.hidden
        meta = dataset.meta_hidden
    out = np.empty((len(pairs),) + source.shape[1:])
    for i, pair in enumerate(pairs):
        try:
            a, b, r = pair["a"], pair["b"], float(pair["r"])
        except (KeyError, TypeError) as exc:
            raise _UsageError(f"{args.pairs}[{i}]: malformed pair: {exc}")
        ia, ib = dataset.row_of(a), dataset.row_of(b)
        out[i] = geometry.interpolate(source[ia], source[ib], r)
    write_embedding_file(out, meta, args.output)
    print(f"interpolate: wrote {len(pairs)} {args.space} embeddings "
          f"to {args.output}")
    return 0


def _cmd_convert(args) -> int:
    dataset = load_dataset(args.dataset)
    queries = _load_pooled_queries(args.input, dataset.meta_pooled.dim)
    cfg = convert.ConversionConfig(k=args.k, solver_rcond=args.rcond)
    if cfg.k > dataset.n:
        raise _UsageError(f"k={cfg.k} exceeds anchor count {dataset.n}")
    outputs = [convert.convert_pooled_to_hidden(q, dataset, cfg)
               for q in queries]
    estimates = np.stack([o.estimated_hidden for o in outputs])
    write_embedding_file(estimates, dataset.meta_hidden, args.output)

    prov = _provenance(args, args.dataset)
    lines = _provenance_comment_lines(prov)
    for i, o in enumerate(outputs):
        lines.append(f"query {i}: residual_norm={_fmt(o.residual_norm)}"
                     + (" degenerate" if o.degenerate else ""))
        for idx, coef in zip(o.neighbor_indices, o.coefficients):
            lines.append(f"  neighbor {idx} ({dataset.words[idx]}): "
                         f"alpha={_fmt(coef)}")
    report_path = args.report or (str(args.output) + ".report.txt")
    _write_text_atomic(report_path, "\n".join(lines) + "\n")
    print(f"convert: {len(outputs)} queries, k={cfg.k}, "
          f"estimates in {args.output}")
    return 0


def _cmd_eval(args) -> int:
    dataset = load_dataset(args.dataset)
    queries = _load_pooled_queries(args.queries, dataset.meta_pooled.dim)
    gt, t_gt, d_gt = read_embedding_file(args.ground_truth)
    est, t_est, d_est = read_embedding_file(args.estimates)
    if (t_gt, d_gt) != (t_est, d_est) or gt.shape[0] != est.shape[0]:
        raise _UsageError("ground-truth and estimate files disagree in shape")
    report = evalmetrics.evaluate(queries, gt.astype(np.float64),
                                  est.astype(np.float64), dataset, args.ell)
    prov = _provenance(args, args.dataset, notes=[SPEARMAN_NOTE])
    _write_json_atomic(args.output, {
        "provenance": prov,
        "l2_error": report.l2_error_mean,
        "rank_corr": {str(ell): v for ell, v in report.rank_corr.items()},
        "dimensionwise": report.dimensionwise_error.tolist(),
        "samples": report.sample_count,
    })
    if args.csv:
        per_sample = evalmetrics.per_sample_l2_error(
            gt.astype(np.float64), est.astype(np.float64))
        lines = _provenance_comment_lines(prov)
        lines.append("sample,l2_error")
        lines += [f"{i},{float(v)!r}" for i, v in enumerate(per_sample)]
        _write_text_atomic(args.csv, "\n".join(lines) + "\n")
    print(f"eval: {report.sample_count} samples, "
          f"l2_error={_fmt(report.l2_error_mean)}")
    return 0


def _read_score_column(path):
    scores = []
    with open(path, encoding="utf-8") as f:
        for line_no, line in enumerate(f, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            try:
                scores.append(float(line))
            except ValueError:
                if line_no == 1:  # header row
                    continue
                raise _UsageError(f"{path}:{line_no}: not a number: {line!r}")
    if len(scores) < 2:
        raise _UsageError(f"{path}: need >= 2 scores")
    return scores


def _cmd_fit_boundary(args) -> int:
    matching = _read_score_column(args.matching)
    mismatching = _read_score_column(args.mismatching)
    model = blend.fit_boundary(matching, mismatching)
    _write_json_atomic(args.output, {
        "provenance": _provenance(args),
        "mu_match": model.mu_match,
        "sigma_match": model.sigma_match,
        "mu_mismatch": model.mu_mismatch,
        "sigma_mismatch": model.sigma_mismatch,
        "threshold": model.threshold,
        "flagged": model.flagged,
    })
    print(f"fit-boundary: threshold={_fmt(model.threshold)}"
          + (" (flagged)" if model.flagged else ""))
    return 0


def _cmd_detect_blend(args) -> int:
    records = blend.read_scores_csv(args.scores,
                                    allow_ragged=args.allow_ragged)
    cfg = blend.BlendConfig(n=args.n, threshold=args.threshold)
    rows = blend.ratio_table(records, cfg)
    prov = _provenance(args)
    lines = _provenance_comment_lines(prov)
    lines.append("ratio,support,concept_a,concept_b,bcd,mcd")
    for row in rows:
        label = "overall" if row.ratio is None else repr(row.ratio)
        if row.support == 0:
            lines.append(f"{label},0,,,,")
        else:
            lines.append(f"{label},{row.support},{row.concept_a!r},"
                         f"{row.concept_b!r},{row.bcd!r},{row.mcd!r}")
    _write_text_atomic(args.output, "\n".join(lines) + "\n")
    overall = rows[-1]
    print(f"detect-blend: {overall.support} pairs, "
          f"bcd={_fmt(overall.bcd)} mcd={_fmt(overall.mcd)}")
    return 0


def _cmd_nn_words(args) -> int:
    dataset = load_dataset(args.dataset)
    nonwords = _load_pooled_queries(args.nonwords, dataset.meta_pooled.dim)
    if args.ids:
        ids = [line.strip() for line in
               Path(args.ids).read_text(encoding="utf-8").splitlines()
               if line.strip()]
        if len(ids) != nonwords.shape[0]:
            raise _UsageError(
                f"{args.ids}: {len(ids)} ids for {nonwords.shape[0]} nonwords"
            )
    else:
        ids = [f"nonword{i:04d}" for i in range(nonwords.shape[0])]
    records = blend.nonword_neighbors(
        nonwords, ids, dataset.words, dataset.pooled,
        closeness_percentile=args.percentile,
        ratio_min=args.ratio_min, ratio_max=args.ratio_max)
    prov = _provenance(args, args.dataset, notes=[PSEUDO_RATIO_NOTE])
    lines = _provenance_comment_lines(prov)
    lines.append("nonword_id,first_nn,second_nn,d1,d2,"
                 "pseudo_ratio,distance_ratio,kept")
    for rec in records:
        if rec.no_eligible_second:
            lines.append(f"{rec.nonword_id},{rec.first_nn},,{rec.d1!r},,,,"
                         f"{str(rec.kept).lower()}")
        else:
            lines.append(
                f"{rec.nonword_id},{rec.first_nn},{rec.second_nn},"
                f"{rec.d1!r},{rec.d2!r},{rec.pseudo_ratio!r},"
                f"{rec.distance_ratio!r},{str(rec.kept).lower()}")
    _write_text_atomic(args.output, "\n".join(lines) + "\n")
    kept = sum(r.kept for r in records)
    print(f"nn-words: kept {kept} of {len(records)} nonwords")
    return 0


def _parse_token_range(spec: str, t_max: int):
    if ":" in spec:
        lo, hi = spec.split(":", 1)
        tokens = list(range(int(lo), int(hi)))
    else:
        tokens = [int(x) for x in spec.split(",")]
    for t in tokens:
        if not 0 <= t < t_max:
            raise _UsageError(f"token {t} outside [0, {t_max})")
    return tokens


def _cmd_cca(args) -> int:
    dataset = load_dataset(args.dataset)
    tokens = _parse_token_range(args.tokens, dataset.meta_hidden.token_count)
    result = cca.tokenwise_cca(dataset, tokens, args.regularization)
    prov = _provenance(args, args.dataset,
                       notes=["centering only, ridge-regularized whitening"])
    lines = _provenance_comment_lines(prov)
    lines.append("token,max_correlation")
    for t, corr in zip(result.token_indices,
                       result.max_correlation_per_token):
        lines.append(f"{t},{float(corr)!r}")
    _write_text_atomic(args.output, "\n".join(lines) + "\n")
    print(f"cca: {len(tokens)} tokens over {result.sample_count} samples")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="embedblend")
    parser.add_argument("--threads", type=int, default=1,
                        help="worker hint; never changes output bytes")
    parser.add_argument("--seed", type=int, default=0,
                        help="recorded in provenance; no sampling paths yet")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("interpolate",
                       help="batch-interpolate word pairs from a pairs file")
    p.add_argument("--dataset", required=True)
    p.add_argument("--pairs", required=True)
    p.add_argument("--space", choices=("pooled", "hidden"), default="hidden")
    p.add_argument("--output", required=True)
    p.set_defaults(func=_cmd_interpolate)

    p = sub.add_parser("convert",
                       help="convert pooled queries to hidden estimates")
    p.add_argument("--dataset", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--k", type=int, default=200)
    p.add_argument("--rcond", type=float, default=convert.DEFAULT_RCOND)
    p.add_argument("--output", required=True)
    p.add_argument("--report")
    p.set_defaults(func=_cmd_convert)

    p = sub.add_parser("eval", help="conversion quality metrics")
    p.add_argument("--dataset", required=True)
    p.add_argument("--queries", required=True)
    p.add_argument("--ground-truth", required=True)
    p.add_argument("--estimates", required=True)
    p.add_argument("--ell", type=int, nargs="+", default=[2, 5])
    p.add_argument("--output", required=True)
    p.add_argument("--csv")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("fit-boundary",
                       help="fit the single-concept score boundary")
    p.add_argument("--matching", required=True)
    p.add_argument("--mismatching", required=True)
    p.add_argument("--output", required=True)
    p.set_defaults(func=_cmd_fit_boundary)

    p = sub.add_parser("detect-blend", help="blend-case ratio table")
    p.add_argument("--scores", required=True)
    p.add_argument("--threshold", type=float, default=0.15)
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--allow-ragged", action="store_true")
    p.add_argument("--output", required=True)
    p.set_defaults(func=_cmd_detect_blend)

    p = sub.add_parser("nn-words", help="nonword nearest-word protocol")
    p.add_argument("--dataset", required=True)
    p.add_argument("--nonwords", required=True)
    p.add_argument("--ids")
    p.add_argument("--percentile", type=float, default=1.0)
    p.add_argument("--ratio-min", type=float, default=0.4)
    p.add_argument("--ratio-max", type=float, default=0.6)
    p.add_argument("--output", required=True)
    p.set_defaults(func=_cmd_nn_words)

    p = sub.add_parser("cca", help="token-wise max canonical correlation")
    p.add_argument("--dataset", required=True)
    p.add_argument("--tokens", default="0:11",
                   help="range lo:hi or comma-separated list")
    p.add_argument("--regularization", type=float,
                   default=cca.DEFAULT_REGULARIZATION)
    p.set_defaults(func=_cmd_cca)
    p.add_argument("--output", required=True)

    return parser


def run(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except KeyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (EmbeddingFormatError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
