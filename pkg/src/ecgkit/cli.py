"""``ecgkit`` command line.

Exit codes: 0 success, 2 configuration error, 3 file/format error,
4 validation error. Progress goes to stderr; data only to files or stdout.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from . import __version__
from .config import PipelineConfig, load_config, resolve_threads
from .exceptions import ConfigError, EcgKitError, FormatError, SignalTokenTruncated, ValidationError

logger = logging.getLogger("ecgkit")

RECORD_SUFFIXES = (".ecgb", ".csv")
SYMBOL_SUFFIX = ".sym.json"
TOKEN_SUFFIX = ".tok.json"

EXIT_CONFIG, EXIT_IO, EXIT_VALIDATION = 2, 3, 4


# ---------------------------------------------------------------- helpers


def pmap(fn: Callable, items: Sequence, threads: int) -> list:
    """Map in a thread pool; results keep input order."""
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _stem(path: Path, suffix: str) -> str:
    name = path.name
    return name[: -len(suffix)] if name.endswith(suffix) else path.stem


def list_inputs(path, suffixes: Iterable[str]) -> list[Path]:
    path = Path(path)
    suffixes = tuple(suffixes)
    if path.is_file():
        return [path]
    if not path.is_dir():
        raise FileNotFoundError(f"no such file or directory: {path}")
    files = sorted(p for p in path.iterdir() if p.is_file() and p.name.endswith(suffixes))
    if not files:
        raise FileNotFoundError(f"{path} holds no {'/'.join(suffixes)} files")
    return files


def _outdir(path) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


# ---------------------------------------------------------------- commands


def cmd_synth(args, cfg: PipelineConfig, threads: int) -> int:
    from .io import write_record
    from .synthetic import synthetic_ecg

    out = _outdir(args.out)
    seed = args.seed if args.seed is not None else cfg.seed

    def one(i):
        rec = synthetic_ecg(seed=seed * 100003 + i, fs=args.fs, seconds=args.seconds,
                            source_id=f"synth{i:05d}")
        write_record(rec, out / f"synth{i:05d}.{args.format}")

    pmap(one, list(range(args.n)), threads)
    logger.info("synth records=%d out=%s", args.n, out)
    return 0


def run_preprocess(in_path, out_path, pcfg, fs, threads) -> list[Path]:
    from .io import write_record
    from .preprocess import preprocess_pipeline

    paths = list_inputs(in_path, RECORD_SUFFIXES)
    out = _outdir(out_path)

    def one(p):
        from .io import read_record

        rec = read_record(p, fs=fs)
        if not rec.source_id:
            rec = replace(rec, source_id=p.stem)
        segs = preprocess_pipeline(rec, pcfg)
        written = []
        for s in segs:
            target = out / f"{s.source_id}.ecgb"
            write_record(s, target)
            written.append(target)
        return written

    written = [p for group in pmap(one, paths, threads) for p in group]
    logger.info("preprocess records=%d segments=%d out=%s", len(paths), len(written), out)
    return written


def cmd_preprocess(args, cfg, threads) -> int:
    pcfg = cfg.preprocess
    if args.no_segment:
        pcfg = replace(pcfg, segment_seconds=None)
    if args.target_fs is not None:
        pcfg = replace(pcfg, target_fs=args.target_fs)
    run_preprocess(args.input, args.out, pcfg, args.fs, threads)
    return 0


def run_symbolize(in_path, out_path, threads) -> list[Path]:
    from .io import read_record
    from .preprocess import normalize_minmax
    from .symbolic import quantize, write_symbols

    paths = list_inputs(in_path, RECORD_SUFFIXES)
    out = _outdir(out_path)

    def one(p):
        target = out / f"{p.stem}{SYMBOL_SUFFIX}"
        write_symbols(quantize(normalize_minmax(read_record(p))), target)
        return target

    written = pmap(one, paths, threads)
    logger.info("symbolize records=%d out=%s", len(written), out)
    return written


def cmd_symbolize(args, cfg, threads) -> int:
    run_symbolize(args.input, args.out, threads)
    return 0


def _load_corpus(path, threads):
    from .io import read_record
    from .preprocess import normalize_minmax
    from .symbolic import quantize, read_symbols

    path = Path(path)
    sym_files = list_inputs(path, (SYMBOL_SUFFIX,)) if path.is_file() or any(
        p.name.endswith(SYMBOL_SUFFIX) for p in path.iterdir()
    ) else []
    if sym_files:
        return pmap(read_symbols, sym_files, threads)
    rec_files = list_inputs(path, RECORD_SUFFIXES)
    return pmap(lambda p: quantize(normalize_minmax(read_record(p))), rec_files, threads)


def run_bpe_train(corpus, vocab_out, merges, id_offset, threads, sample=None, seed=0):
    from .symbolic import bpe_train, save_vocab

    seqs = _load_corpus(corpus, threads)
    if sample is not None and sample < len(seqs):
        idx = np.sort(np.random.default_rng(seed).choice(len(seqs), size=sample, replace=False))
        seqs = [seqs[i] for i in idx]
    vocab = bpe_train(seqs, merges, id_offset=id_offset, n_jobs=threads)
    save_vocab(vocab, vocab_out)
    logger.info("bpe-train sequences=%d merges=%d vocab=%d out=%s",
                len(seqs), len(vocab.merges), len(vocab), vocab_out)
    return vocab


def cmd_bpe_train(args, cfg, threads) -> int:
    merges = args.merges if args.merges is not None else cfg.symbolic.merges
    offset = args.id_offset if args.id_offset is not None else cfg.symbolic.id_offset
    run_bpe_train(args.corpus, args.vocab_out, merges, offset, threads, args.sample, cfg.seed)
    return 0


def _map_files(in_path, out_path, in_suffix, out_suffix, fn, threads) -> list[Path]:
    files = list_inputs(in_path, (in_suffix,))
    out_path = Path(out_path)
    if Path(in_path).is_file() and out_path.name.endswith(out_suffix):
        out_path.parent.mkdir(parents=True, exist_ok=True)
        targets = [out_path]
    else:
        out = _outdir(out_path)
        targets = [out / f"{_stem(p, in_suffix)}{out_suffix}" for p in files]
    pmap(lambda pair: fn(*pair), list(zip(files, targets)), threads)
    return targets


def run_encode(in_path, out_path, vocab_path, threads) -> list[Path]:
    from .symbolic import bpe_encode, load_vocab, read_symbols, write_tokens

    vocab = load_vocab(vocab_path)
    written = _map_files(in_path, out_path, SYMBOL_SUFFIX, TOKEN_SUFFIX,
                         lambda src, dst: write_tokens(bpe_encode(read_symbols(src), vocab), dst),
                         threads)
    logger.info("encode files=%d", len(written))
    return written


def cmd_encode(args, cfg, threads) -> int:
    run_encode(args.input, args.out, args.vocab, threads)
    return 0


def cmd_decode(args, cfg, threads) -> int:
    from .symbolic import bpe_decode, load_vocab, read_tokens, write_symbols

    vocab = load_vocab(args.vocab)
    written = _map_files(args.input, args.out, TOKEN_SUFFIX, SYMBOL_SUFFIX,
                         lambda src, dst: write_symbols(bpe_decode(read_tokens(src), vocab), dst),
                         threads)
    logger.info("decode files=%d", len(written))
    return 0


def run_render(in_path, out_path, rcfg, threads) -> list[Path]:
    from .io import read_record
    from .render import render_plot

    paths = list_inputs(in_path, RECORD_SUFFIXES)
    out = _outdir(out_path)

    def one(p):
        target = out / f"{p.stem}.png"
        render_plot(read_record(p), rcfg).save(target)
        return target

    written = pmap(one, paths, threads)
    logger.info("render images=%d out=%s", len(written), out)
    return written


def cmd_render(args, cfg, threads) -> int:
    rcfg = cfg.render
    if args.width is not None:
        rcfg = replace(rcfg, width=args.width)
    if args.height is not None:
        rcfg = replace(rcfg, height=args.height)
    run_render(args.input, args.out, rcfg, threads)
    return 0


def run_stack(in_path, out_path, threads) -> list[Path]:
    from .io import read_record
    from .render import stack_signal

    paths = list_inputs(in_path, RECORD_SUFFIXES)
    out = _outdir(out_path)

    def one(p):
        target = out / f"{p.stem}.npy"
        np.save(target, stack_signal(read_record(p)).data, allow_pickle=False)
        return target

    written = pmap(one, paths, threads)
    logger.info("stack arrays=%d out=%s", len(written), out)
    return written


def cmd_stack(args, cfg, threads) -> int:
    run_stack(args.input, args.out, threads)
    return 0


def run_perturb(in_path, out_path, pcfg, threads) -> list[Path]:
    from .io import read_record, write_record
    from .perturb import perturb, record_rng

    paths = list_inputs(in_path, RECORD_SUFFIXES)
    out = _outdir(out_path)

    def one(item):
        i, p = item
        rec, flags = perturb(read_record(p), pcfg, record_rng(pcfg.seed, i))
        write_record(rec, out / f"{p.stem}.ecgb")
        return {"id": p.stem, "index": i, "noise": flags.noise_applied,
                "wander": flags.wander_applied, "phase": flags.phase}

    manifest = pmap(one, list(enumerate(paths)), threads)
    with open(out / "perturbations.jsonl", "w", encoding="utf-8") as fh:
        for row in manifest:
            fh.write(json.dumps(row, sort_keys=True) + "\n")
    logger.info("perturb records=%d perturbed=%d seed=%d out=%s", len(paths),
                sum(r["noise"] for r in manifest), pcfg.seed, out)
    return [out / f"{p.stem}.ecgb" for p in paths]


def cmd_perturb(args, cfg, threads) -> int:
    pcfg = cfg.perturb
    if args.seed is not None:
        pcfg = replace(pcfg, seed=args.seed)
    run_perturb(args.input, args.out, pcfg, threads)
    return 0


def _resolve_signal(signals: Path, ref: str) -> Path:
    for cand in (signals / f"{ref}{TOKEN_SUFFIX}", signals / ref):
        if cand.is_file():
            return cand
    raise FileNotFoundError(f"signal {ref!r} not found under {signals}")


def run_assemble(conversations, out_path, acfg, signals=None, tokenizer_in=None,
                 tokenizer_out=None) -> dict:
    from .assemble import (
        WhitespaceTokenizer,
        assemble_latent,
        assemble_tokenized,
        read_conversations,
        write_samples,
    )
    from .symbolic import read_tokens

    convs = read_conversations(conversations)
    tok = WhitespaceTokenizer.load(tokenizer_in) if tokenizer_in else WhitespaceTokenizer()
    if acfg.mode == "tokenized" and signals is None:
        raise ConfigError("tokenized assembly needs a signals directory")
    samples, dropped, overlap = [], 0, 0
    # serial on purpose: the reference tokenizer assigns ids in first-seen order
    for conv in convs:
        try:
            if acfg.mode == "latent":
                samples.append(assemble_latent(conv, acfg.template, tok, acfg.T))
            else:
                ref = conv.signal_ref or conv.id
                x_id = read_tokens(_resolve_signal(Path(signals), ref))
                if x_id.ids and min(x_id.ids) < len(tok):
                    overlap += 1
                samples.append(assemble_tokenized(conv, acfg.template, tok, x_id, acfg.T,
                                                  acfg.min_signal))
        except SignalTokenTruncated as exc:
            dropped += 1
            logger.warning("assemble dropped id=%s reason=%s", conv.id, exc)
    if overlap:
        logger.warning("assemble signal ids of %d samples overlap text ids below %d; "
                       "set [symbolic] id_offset to the text vocabulary size", overlap, len(tok))
    Path(out_path).parent.mkdir(parents=True, exist_ok=True)
    write_samples(samples, out_path)
    if tokenizer_out:
        tok.save(tokenizer_out)
    stats = {"samples": len(samples), "dropped": dropped,
             "degenerate": sum(s.degenerate for s in samples)}
    logger.info("assemble mode=%s template=%s T=%d samples=%d dropped=%d degenerate=%d",
                acfg.mode, acfg.template, acfg.T, stats["samples"], dropped, stats["degenerate"])
    return stats


def cmd_assemble(args, cfg, threads) -> int:
    acfg = cfg.assemble
    overrides = {k: v for k, v in (("template", args.template), ("T", args.T),
                                   ("mode", args.mode), ("min_signal", args.min_signal))
                 if v is not None}
    acfg = replace(acfg, **overrides)
    run_assemble(args.conversations, args.out, acfg, args.signals, args.tokenizer,
                 args.tokenizer_out)
    return 0


def _read_texts(path) -> dict[str, str] | list[str]:
    path = Path(path)
    if path.suffix == ".jsonl":
        out = {}
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                if not line.strip():
                    continue
                try:
                    row = json.loads(line)
                    out[str(row["id"])] = str(row["text"])
                except (json.JSONDecodeError, KeyError) as exc:
                    raise ValidationError(f"{path}:{lineno}: need {{id, text}} ({exc})") from exc
        return out
    return path.read_text(encoding="utf-8").splitlines()


def _align(preds, refs) -> tuple[list[str], list[str]]:
    if isinstance(preds, dict) != isinstance(refs, dict):
        raise ValidationError("predictions and references must use the same file format")
    if isinstance(preds, dict):
        missing = sorted(set(refs) - set(preds))
        if missing:
            raise ValidationError(f"no prediction for ids {missing[:5]}")
        keys = sorted(refs)
        return [preds[k] for k in keys], [refs[k] for k in keys]
    if len(preds) != len(refs):
        raise ValidationError(f"{len(preds)} predictions vs {len(refs)} references")
    return list(preds), list(refs)


def cmd_evaluate(args, cfg, threads) -> int:
    from .eval import ScoreTable, fetch_external_scores, read_external_scores, score_pairs

    cands, refs = _align(_read_texts(args.predictions), _read_texts(args.references))
    scores = score_pairs(cands, refs, n_jobs=threads)
    external = None
    if args.bertscore_file:
        external = read_external_scores(args.bertscore_file, expected=len(cands))
    elif args.bertscore_url:
        external = fetch_external_scores(args.bertscore_url, cands, refs)
    if external is not None:
        scores["bertscore"] = float(np.mean(external)) if external else 0.0
    table = ScoreTable([(args.dataset, args.model, m, args.seed, v) for m, v in scores.items()])
    if args.out:
        table.write_csv(args.out)
    else:
        sys.stdout.write(table.to_csv())
    logger.info("evaluate pairs=%d model=%s dataset=%s", len(cands), args.model, args.dataset)
    return 0


def _read_tables(paths):
    from .eval import ScoreTable

    rows = []
    for p in paths:
        rows.extend(ScoreTable.read_csv(p).rows())
    return ScoreTable(rows)


def cmd_significance(args, cfg, threads) -> int:
    from .eval import count_significant_wins

    alpha = args.alpha if args.alpha is not None else cfg.eval.alpha
    report = count_significant_wins(_read_tables(args.scores), alpha)
    if args.wins_out:
        Path(args.wins_out).write_text(report.wins_csv(), encoding="utf-8")
    else:
        sys.stdout.write(report.wins_csv())
    if args.report_out:
        Path(args.report_out).write_text(report.tests_csv(), encoding="utf-8")
    logger.info("significance cells=%d significant=%d alpha=%g", len(report.tests),
                sum(t.significant for t in report.tests), alpha)
    return 0


def cmd_radar(args, cfg, threads) -> int:
    from .eval import normalize_radar, radar_csv

    points = normalize_radar(_read_tables(args.scores))
    for p in points:
        if p.constant:
            logger.warning("radar constant column dataset=%s metric=%s", p.dataset, p.metric)
    text = radar_csv(points)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


DEMO_QUESTION = "Please describe the rhythm in this ECG."
DEMO_ANSWER = "The tracing shows a regular rhythm without ectopic beats."


def write_demo_conversations(ids: Sequence[str], path) -> None:
    from .assemble import Conversation, Turn, write_conversations

    convs = [Conversation((Turn(DEMO_QUESTION, DEMO_ANSWER),), id=i, signal_ref=i) for i in ids]
    write_conversations(convs, path)


def cmd_pipeline(args, cfg, threads) -> int:
    src = args.input or cfg.paths.input
    dst = args.out or cfg.paths.output
    if not src or not dst:
        raise ConfigError("pipeline needs an input and an output path (flags or [paths])")
    out = _outdir(dst)
    segments = run_preprocess(src, out / "segments", cfg.preprocess, args.fs, threads)
    if not segments:
        raise ValidationError("preprocessing produced no segments")
    run_symbolize(out / "segments", out / "symbols", threads)
    run_bpe_train(out / "symbols", out / "vocab.json", cfg.symbolic.merges,
                  cfg.symbolic.id_offset, threads)
    run_encode(out / "symbols", out / "tokens", out / "vocab.json", threads)
    run_render(out / "segments", out / "images", cfg.render, threads)
    run_stack(out / "segments", out / "stacked", threads)
    run_perturb(out / "segments", out / "perturbed", cfg.perturb, threads)
    conv_path = cfg.paths.conversations
    if conv_path is None:
        conv_path = out / "conversations.jsonl"
        write_demo_conversations([p.stem for p in segments], conv_path)
    run_assemble(conv_path, out / "samples_latent.jsonl", replace(cfg.assemble, mode="latent"),
                 tokenizer_out=out / "tokenizer.json")
    run_assemble(conv_path, out / "samples_tokenized.jsonl",
                 replace(cfg.assemble, mode="tokenized"), signals=out / "tokens",
                 tokenizer_in=out / "tokenizer.json", tokenizer_out=out / "tokenizer.json")
    logger.info("pipeline done out=%s", out)
    return 0


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ecgkit", description="ECG representation toolkit")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--config", help="TOML configuration file")
    parser.add_argument("--threads", type=int, help="worker threads (default: $ECGKIT_THREADS or 1)")
    parser.add_argument("--validate", action="store_true",
                        help="check configuration and inputs, then exit without writing")
    parser.add_argument("--log-level", default="INFO",
                        choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="write a synthetic 12-lead corpus")
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--seed", type=int)
    p.add_argument("--fs", type=float, default=500.0)
    p.add_argument("--seconds", type=float, default=10.0)
    p.add_argument("--format", choices=["ecgb", "csv"], default="ecgb")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth, inputs=())

    p = sub.add_parser("preprocess", help="filter, resample and segment records")
    p.add_argument("input")
    p.add_argument("out")
    p.add_argument("--fs", type=float, help="sampling rate for CSV files without an fs line")
    p.add_argument("--target-fs", type=float)
    p.add_argument("--no-segment", action="store_true")
    p.set_defaults(func=cmd_preprocess, inputs=("input",))

    p = sub.add_parser("symbolize", help="min-max normalize and quantize records to a-z")
    p.add_argument("input")
    p.add_argument("out")
    p.set_defaults(func=cmd_symbolize, inputs=("input",))

    p = sub.add_parser("bpe-train", help="learn BPE merges from symbol files or records")
    p.add_argument("corpus")
    p.add_argument("--merges", type=int)
    p.add_argument("--id-offset", type=int)
    p.add_argument("--sample", type=int, help="train on a seeded random subset of this size")
    p.add_argument("--vocab-out", required=True)
    p.set_defaults(func=cmd_bpe_train, inputs=("corpus",))

    for name, func, help_ in (("encode", cmd_encode, "symbol files to token files"),
                              ("decode", cmd_decode, "token files to symbol files")):
        p = sub.add_parser(name, help=help_)
        p.add_argument("input")
        p.add_argument("out")
        p.add_argument("--vocab", required=True)
        p.set_defaults(func=func, inputs=("input", "vocab"))

    p = sub.add_parser("render", help="12-panel PNG plots")
    p.add_argument("input")
    p.add_argument("out")
    p.add_argument("--width", type=int)
    p.add_argument("--height", type=int)
    p.set_defaults(func=cmd_render, inputs=("input",))

    p = sub.add_parser("stack", help="(3, C, L) .npy arrays")
    p.add_argument("input")
    p.add_argument("out")
    p.set_defaults(func=cmd_stack, inputs=("input",))

    p = sub.add_parser("perturb", help="noise and baseline-wander robustness corpora")
    p.add_argument("input")
    p.add_argument("out")
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_perturb, inputs=("input",))

    p = sub.add_parser("assemble", help="fixed-length training samples as JSON lines")
    p.add_argument("--conversations", required=True)
    p.add_argument("--signals", help="directory of token files (tokenized mode)")
    p.add_argument("--template", choices=["llama32", "gemma2", "qwen25"])
    p.add_argument("--T", type=int)
    p.add_argument("--mode", choices=["latent", "tokenized"])
    p.add_argument("--min-signal", type=int)
    p.add_argument("--tokenizer", help="existing tokenizer file to start from")
    p.add_argument("--tokenizer-out")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_assemble, inputs=("conversations", "signals", "tokenizer"))

    p = sub.add_parser("evaluate", help="score predictions against references")
    p.add_argument("--predictions", required=True)
    p.add_argument("--references", required=True)
    p.add_argument("--dataset", default="default")
    p.add_argument("--model", default="model")
    p.add_argument("--seed", default="0")
    p.add_argument("--bertscore-file")
    p.add_argument("--bertscore-url")
    p.add_argument("--out")
    p.set_defaults(func=cmd_evaluate, inputs=("predictions", "references", "bertscore_file"))

    p = sub.add_parser("significance", help="count significant wins per model")
    p.add_argument("scores", nargs="+")
    p.add_argument("--alpha", type=float)
    p.add_argument("--wins-out")
    p.add_argument("--report-out")
    p.set_defaults(func=cmd_significance, inputs=("scores",))

    p = sub.add_parser("radar", help="per-metric [0, 1] normalized plot data")
    p.add_argument("scores", nargs="+")
    p.add_argument("--out")
    p.set_defaults(func=cmd_radar, inputs=("scores",))

    p = sub.add_parser("pipeline", help="run every stage on a record directory")
    p.add_argument("--input")
    p.add_argument("--out")
    p.add_argument("--fs", type=float)
    p.set_defaults(func=cmd_pipeline, inputs=("input",))
    return parser


def _check_inputs(args) -> None:
    for name in args.inputs:
        value = getattr(args, name, None)
        values = value if isinstance(value, list) else [value]
        for v in values:
            if v is not None and not Path(v).exists():
                raise FileNotFoundError(f"--{name.replace('_', '-')}: no such path {v}")


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(stream=sys.stderr, level=getattr(logging, args.log_level),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config)
        threads = resolve_threads(args.threads, cfg)
        if args.validate:
            cfg.validate_paths()
            _check_inputs(args)
            logger.info("validate ok command=%s threads=%d", args.command, threads)
            return 0
        return args.func(args, cfg, threads)
    except ConfigError as exc:
        logger.error("config: %s", exc)
        return EXIT_CONFIG
    except (FormatError, OSError) as exc:
        logger.error("io: %s", exc)
        return EXIT_IO
    except (ValidationError, EcgKitError, ValueError) as exc:
        logger.error("validation: %s", exc)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
