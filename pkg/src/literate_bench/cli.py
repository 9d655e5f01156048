"""``literate-bench`` command line.

Exit codes: 0 success, 1 fatal error, 2 report written but some predictions
were malformed (parsed leniently), 64 usage error, 65 codec input error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path
from typing import Any, Sequence, TextIO

from . import __version__
from .codec import (
    BracketedParseError,
    CodecConfig,
    LayoutParseError,
    MissingBoxError,
    decode_bracketed,
    decode_bracketed_lenient,
    decode_layout,
    decode_layout_lenient,
    encode_bracketed,
    encode_layout,
    stream_from_json,
    stream_to_json,
)
from .core import (
    ManifestError,
    MarkdownDocument,
    PageDocument,
    Task,
    TextLine,
    ValidationError,
    dumps_record,
    iter_jsonl,
    read_manifest,
    validate_page,
)
from .curation.align import alignment_ratio
from .curation.langid import default_classifier
from .curation.minhash import DedupConfig, dedup
from .curation.mixture import MixtureSource, MixtureSpec, SourceError, sample_mixture
from .markdown_metrics import evaluate_markdown
from .ocr_metrics import evaluate_ocr
from .parallel import OrphanPredictionError
from .report import render_table, report_to_json

log = logging.getLogger("literate_bench")

EXIT_OK, EXIT_FATAL, EXIT_MALFORMED, EXIT_USAGE, EXIT_DATA = 0, 1, 2, 64, 65
SEED_ENV = "LITERATE_BENCH_SEED"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _unit_interval(name: str, value: float, lo_open: bool = False) -> float:
    if not (0 < value <= 1 if lo_open else 0 <= value <= 1):
        raise UsageError(f"{name} must be in {'(0, 1]' if lo_open else '[0, 1]'}, got {value}")
    return value


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{SEED_ENV} must be an integer, got {raw!r}") from None


def _open_in(path: str) -> TextIO:
    if path == "-":
        return sys.stdin
    return open(path, encoding="utf-8")


def _write_out(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


# ---------------------------------------------------------------------------
# eval


def _salvage_page(raw: Any, gt: PageDocument) -> tuple[PageDocument, bool]:
    """Build a prediction page, dropping lines that break an invariant."""
    if not isinstance(raw, dict):
        raise ValidationError("page must be an object")
    raw = dict(raw)
    raw.setdefault("width", gt.width)
    raw.setdefault("height", gt.height)
    violations = validate_page(raw)
    if not violations:
        return PageDocument.from_dict(raw), False
    if any(v.line is None for v in violations):
        raise ValidationError("; ".join(map(str, violations)))
    bad = {v.line for v in violations}
    kept = [ln for i, ln in enumerate(raw["lines"]) if i not in bad]
    return PageDocument.from_dict({**raw, "lines": kept}), True


def load_predictions(
    stream: TextIO, task: Task, samples: dict[str, Any], cfg: CodecConfig
) -> tuple[dict[str, Any], list[str]]:
    """Parse a prediction JSONL file leniently.

    Returns the usable predictions and one diagnostic per malformed record.
    Unknown ids are kept so the evaluator can reject them as orphans.
    """
    preds: dict[str, Any] = {}
    problems: list[str] = []
    for lineno, line in enumerate(stream, start=1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            problems.append(f"line {lineno}: invalid JSON ({exc.msg})")
            continue
        pid = rec.get("id") if isinstance(rec, dict) else None
        if not isinstance(pid, str):
            problems.append(f"line {lineno}: record without a string id")
            continue
        if pid in preds:
            raise ManifestError(f"duplicate prediction id {pid!r}", lineno)
        sample = samples.get(pid)
        try:
            if task is Task.MARKDOWN:
                if not isinstance(rec.get("markdown"), str):
                    raise ValidationError("needs a 'markdown' string")
                preds[pid] = MarkdownDocument(rec["markdown"])
                continue
            if sample is None:
                # orphan; any page shape will do for the error message
                preds[pid] = PageDocument(1, 1)
                continue
            gt: PageDocument = sample.ground_truth
            if "page" in rec:
                page, damaged = _salvage_page(rec["page"], gt)
                preds[pid] = page
                if damaged:
                    problems.append(f"{pid}: page had invalid lines, dropped them")
            elif isinstance(rec.get("text"), str):
                page, errs = decode_bracketed_lenient(rec["text"], gt.width, gt.height, cfg)
                preds[pid] = page
                if errs:
                    problems.append(f"{pid}: {len(errs)} malformed line(s), first: {errs[0]}")
            elif isinstance(rec.get("tokens"), list):
                page, errs = decode_layout_lenient(stream_from_json(rec["tokens"]), gt.width, gt.height, cfg)
                preds[pid] = page
                if errs:
                    problems.append(f"{pid}: {len(errs)} token error(s), first: {errs[0].message}")
            elif isinstance(rec.get("lines"), list):
                preds[pid] = PageDocument(
                    gt.width, gt.height, tuple(TextLine(str(t)) for t in rec["lines"])
                )
            else:
                raise ValidationError("needs 'page', 'text', 'tokens' or 'lines'")
        except (ValidationError, LayoutParseError, ValueError) as exc:
            problems.append(f"{pid}: unusable prediction ({exc})")
    return preds, problems


def cmd_eval(args: argparse.Namespace) -> int:
    task = Task(args.task)
    cfg = CodecConfig(args.bins)
    seed = args.seed if args.seed is not None else _default_seed()
    try:
        with open(args.manifest, encoding="utf-8") as fh:
            samples = read_manifest(fh)
    except (OSError, ManifestError) as exc:
        print(f"error: manifest: {exc}", file=sys.stderr)
        return EXIT_FATAL
    wrong = [s.id for s in samples if s.task is not task]
    if wrong:
        print(f"error: manifest has non-{task.value} samples: {', '.join(wrong[:5])}", file=sys.stderr)
        return EXIT_FATAL
    by_id = {s.id: s for s in samples}
    try:
        with open(args.pred, encoding="utf-8") as fh:
            preds, problems = load_predictions(fh, task, by_id, cfg)
    except (OSError, ManifestError) as exc:
        print(f"error: predictions: {exc}", file=sys.stderr)
        return EXIT_FATAL
    for p in problems:
        print(f"warning: malformed prediction: {p}", file=sys.stderr)
    notes = [f"malformed prediction: {p}" for p in problems]
    try:
        if task is Task.OCR:
            report = evaluate_ocr(samples, preds, jobs=args.jobs, diagnostics=notes)
        else:
            report = evaluate_markdown(samples, preds, jobs=args.jobs, diagnostics=notes)
    except OrphanPredictionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FATAL
    config = {
        "task": task.value,
        "manifest": args.manifest,
        "predictions": args.pred,
        "bins": cfg.bins,
        "seed": seed,
    }
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(report_to_json(report, config), encoding="utf-8")
    (out / "report.txt").write_text(render_table(report), encoding="utf-8")
    sys.stdout.write(render_table(report))
    return EXIT_MALFORMED if problems else EXIT_OK


# ---------------------------------------------------------------------------
# curate


def _read_records(path: str) -> list[dict[str, Any]]:
    with _open_in(path) as fh:
        records = [obj for _, obj in iter_jsonl(fh)]
    for i, rec in enumerate(records, start=1):
        if not isinstance(rec, dict) or "id" not in rec:
            raise ManifestError("record must be an object with an 'id'", i)
    return records


def _write_jsonl(path: str | None, rows: Sequence[Any]) -> None:
    _write_out(path, "".join(dumps_record(r) + "\n" for r in rows))


def _report_path(args: argparse.Namespace) -> str | None:
    if args.report:
        return args.report
    if args.out and args.out != "-":
        return args.out + ".report.jsonl"
    return None


def cmd_curate(args: argparse.Namespace) -> int:
    action = args.curate_cmd
    seed = args.seed if args.seed is not None else _default_seed()
    if action == "mix":
        return _curate_mix(args, seed)
    records = _read_records(args.input)
    report_path = _report_path(args)
    if action == "dedup":
        _unit_interval("--threshold", args.threshold, lo_open=True)
        try:
            cfg = DedupConfig(
                threshold=args.threshold, shingle_size=args.shingle, k=args.k,
                bands=args.bands, rows=args.rows, seed=seed, per_source=not args.global_scope,
            )
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        texts = [{**r, "text": str(r.get(args.text_field, ""))} for r in records]
        result = dedup(texts, cfg)
        keep = set(result.kept)
        _write_jsonl(args.out, [r for r in records if str(r["id"]) in keep])
        if report_path:
            _write_jsonl(report_path, [c.to_dict() for c in result.clusters])
        log.info("dedup: kept %d of %d", len(result.kept), len(records))
    elif action == "align":
        _unit_interval("--min-ratio", args.min_ratio)
        kept, dropped = [], []
        for r in records:
            ratio = alignment_ratio(str(r.get(args.text_field, "")), str(r.get("markdown", "")))
            (kept if ratio > args.min_ratio else dropped).append((r, ratio))
        _write_jsonl(args.out, [r for r, _ in kept])
        if report_path:
            _write_jsonl(report_path, [{"id": r["id"], "ratio": q} for r, q in dropped])
    elif action == "lang":
        _unit_interval("--threshold", args.threshold)
        clf = default_classifier()
        kept, dropped = [], []
        for r in records:
            lang, conf = clf.score(str(r.get(args.text_field, "")))
            ok = lang == args.language and conf >= args.threshold
            (kept if ok else dropped).append((r, lang, conf))
        _write_jsonl(args.out, [r for r, _, _ in kept])
        if report_path:
            _write_jsonl(
                report_path,
                [{"id": r["id"], "language": lang, "confidence": conf} for r, lang, conf in dropped],
            )
    return EXIT_OK


def _parse_source(spec: str) -> tuple[str, str, float]:
    name, sep, rest = spec.partition("=")
    path, sep2, weight = rest.rpartition(":")
    if not sep or not sep2 or not name or not path:
        raise UsageError(f"--source must look like NAME=PATH:RATIO, got {spec!r}")
    try:
        return name, path, float(weight)
    except ValueError:
        raise UsageError(f"bad ratio in --source {spec!r}") from None


def _curate_mix(args: argparse.Namespace, seed: int) -> int:
    items = [_parse_source(s) for s in args.source]
    try:
        if args.normalize:
            spec = MixtureSpec.from_weights(items)
        else:
            spec = MixtureSpec(tuple(MixtureSource(*i) for i in items))
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.total < 0:
        raise UsageError("--total must be >= 0")
    try:
        draws = sample_mixture(spec, args.total, seed)
    except SourceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FATAL
    _write_jsonl(args.out, [{"source": name, "record": rec} for name, rec in draws])
    counts = {s.name: 0 for s in spec.sources}
    for name, _ in draws:
        counts[name] += 1
    summary = {
        "seed": seed,
        "total": args.total,
        "ratios": {s.name: s.ratio for s in spec.sources},
        "counts": counts,
    }
    report_path = _report_path(args)
    if report_path:
        _write_out(report_path, json.dumps(summary, sort_keys=True) + "\n")
    return EXIT_OK


# ---------------------------------------------------------------------------
# codec


def cmd_codec(args: argparse.Namespace) -> int:
    cfg = CodecConfig(args.bins)
    with _open_in(args.input) as fh:
        payload = fh.read()
    try:
        if args.codec_cmd == "encode":
            raw = json.loads(payload)
            if isinstance(raw, dict) and "page" in raw:
                raw = raw["page"]
            page = PageDocument.from_dict(raw)
            text = encode_bracketed(page, cfg) if args.format == "bracketed" else stream_to_json(encode_layout(page, cfg)) + "\n"
        else:
            if args.format == "bracketed":
                page = decode_bracketed(payload, args.width, args.height, cfg)
            else:
                w = args.width if args.width is not None else cfg.bins
                h = args.height if args.height is not None else cfg.bins
                page = decode_layout(stream_from_json(payload), w, h, cfg)
            text = json.dumps(page.to_dict(), ensure_ascii=False) + "\n"
    except (json.JSONDecodeError, ValidationError, LayoutParseError, BracketedParseError, MissingBoxError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    _write_out(args.out, text)
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="literate-bench", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    ev = sub.add_parser("eval", help="score predictions against a manifest")
    ev.add_argument("--task", choices=[t.value for t in Task], required=True)
    ev.add_argument("--manifest", required=True)
    ev.add_argument("--pred", required=True)
    ev.add_argument("--out", required=True, help="output directory")
    ev.add_argument("--bins", type=int, default=4096, help="location bins L")
    ev.add_argument("--seed", type=int, default=None)
    ev.add_argument("--jobs", type=int, default=1)
    ev.set_defaults(func=cmd_eval)

    cu = sub.add_parser("curate", help="corpus filtering and mixing")
    csub = cu.add_subparsers(dest="curate_cmd", required=True, parser_class=_Parser)

    def io(sp: argparse.ArgumentParser, needs_input: bool = True) -> None:
        if needs_input:
            sp.add_argument("--in", dest="input", required=True)
            sp.add_argument("--text-field", default="text")
        sp.add_argument("--out", default="-")
        sp.add_argument("--report", default=None, help="drop report path")
        sp.add_argument("--seed", type=int, default=None)

    d = csub.add_parser("dedup", help="MinHash near-duplicate removal")
    io(d)
    d.add_argument("--threshold", type=float, default=0.8)
    d.add_argument("--k", type=int, default=128)
    d.add_argument("--bands", type=int, default=32)
    d.add_argument("--rows", type=int, default=4)
    d.add_argument("--shingle", type=int, default=5)
    d.add_argument("--global", dest="global_scope", action="store_true",
                   help="deduplicate across sources instead of within each")
    a = csub.add_parser("align", help="image-text / markdown overlap filter")
    io(a)
    a.add_argument("--min-ratio", type=float, default=0.95)
    lg = csub.add_parser("lang", help="language filter")
    io(lg)
    lg.add_argument("--threshold", type=float, default=0.5)
    lg.add_argument("--language", default="en")
    mx = csub.add_parser("mix", help="ratio-driven sampling over sources")
    io(mx, needs_input=False)
    mx.add_argument("--source", action="append", required=True, metavar="NAME=PATH:RATIO")
    mx.add_argument("--total", type=int, required=True)
    mx.add_argument("--normalize", action="store_true", help="rescale ratios to sum to 1")
    cu.set_defaults(func=cmd_curate)

    co = sub.add_parser("codec", help="location-token wire formats")
    co.add_argument("codec_cmd", choices=["encode", "decode"])
    co.add_argument("--format", choices=["bracketed", "tokens"], default="bracketed")
    co.add_argument("--in", dest="input", default="-")
    co.add_argument("--out", default="-")
    co.add_argument("--bins", type=int, default=4096)
    co.add_argument("--width", type=int, default=None)
    co.add_argument("--height", type=int, default=None)
    co.set_defaults(func=cmd_codec)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    for name in ("bins", "jobs"):
        if getattr(args, name, 1) < 1:
            print(f"error: --{name} must be >= 1", file=sys.stderr)
            return EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, ManifestError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FATAL


if __name__ == "__main__":
    sys.exit(main())
