"""Batch command line front end: denoise, train, extract, cv, sweep."""
from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .denoiser import denoise, denoise_corpus
from .evaluation import (
    DEFAULT_CV_PAIRINGS,
    DEFAULT_SWEEP_THRESHOLDS,
    PAIRING_NAMES,
    cross_validate,
    report_csv_lines,
    report_summary,
    sweep_csv_lines,
    sweep_summary,
    threshold_sweep,
    write_json,
    write_lines,
)
from .model import ModelConfig, extract_top_k, load_model, save_model, train
from .textkit import Document, document_from_sentences, document_from_text, sentence_text
from .vocab import load_vocabulary

K_PRESETS = {"fao780": 8, "cern290": 7, "nlm500": 15}

TEXT_VARIANTS = ("full", "denoised", "noise")


@dataclass(frozen=True)
class RunConfig:
    command: str
    corpus: str | None
    vocab: str | None
    threshold: float
    k: int
    min_len: int
    max_len: int
    seed: int
    text_variant: str
    pairings: tuple[str, ...] | None
    out: str
    model: str | None
    thresholds: tuple[float, ...]
    free_text: bool


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--corpus", help="directory of <id>.txt and optional <id>.key files")
    common.add_argument("--vocab", help="controlled vocabulary TSV file")
    common.add_argument("--config", help="flat key=value config file; flags take precedence")
    common.add_argument("--threshold", type=float, help="denoising threshold in (0,1]")
    common.add_argument("--k", type=int, help="keyphrases to extract per document")
    common.add_argument("--k-preset", choices=sorted(K_PRESETS), help="named k setting")
    common.add_argument("--min-len", type=int, help="minimum phrase length in words")
    common.add_argument("--max-len", type=int, help="maximum phrase length in words")
    common.add_argument("--seed", type=int, help="seed for all randomized steps")
    common.add_argument("--text-variant", choices=TEXT_VARIANTS)
    common.add_argument("--pairings", help="comma-separated train/test pairing names")
    common.add_argument("--out", help="output directory")
    common.add_argument("--model", help="model file path")
    common.add_argument("--thresholds", help="comma-separated sweep thresholds")
    common.add_argument("--free-text", action="store_true", default=None,
                        help="keep candidates that do not match the vocabulary")

    parser = argparse.ArgumentParser(prog="kpindex", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("denoise", parents=[common], help="write denoised/noise files")
    sub.add_parser("train", parents=[common], help="train a model on a corpus")
    sub.add_parser("extract", parents=[common], help="extract top-k keyphrases per document")
    sub.add_parser("cv", parents=[common], help="10-fold cross-validated evaluation")
    sub.add_parser("sweep", parents=[common], help="error-rate sweep over thresholds")
    return parser


def _read_config_file(path: str) -> dict[str, str]:
    values: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for raw in fh:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"invalid config line: {line!r}")
            key, _, value = line.partition("=")
            values[key.strip().replace("-", "_")] = value.strip()
    return values


def _parse_bool(text: str) -> bool:
    lowered = text.strip().casefold()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"invalid boolean value: {text!r}")


def _parse_floats(text: str) -> tuple[float, ...]:
    return tuple(float(part) for part in text.split(",") if part.strip())


def _parse_names(text: str) -> tuple[str, ...]:
    return tuple(part.strip() for part in text.split(",") if part.strip())


def resolve_config(args: argparse.Namespace) -> RunConfig:
    file_values = _read_config_file(args.config) if args.config else {}

    def pick(name, cast, default):
        flag = getattr(args, name, None)
        if flag is not None:
            return flag
        if name in file_values:
            return cast(file_values[name])
        return default

    k = pick("k", int, None)
    if k is None:
        preset = pick("k_preset", str, None)
        if preset is not None:
            if preset not in K_PRESETS:
                raise ValueError(f"unknown k preset: {preset}")
            k = K_PRESETS[preset]
        else:
            k = 10

    pairings_text = pick("pairings", str, None)
    thresholds_text = pick("thresholds", str, None)
    config = RunConfig(
        command=args.command,
        corpus=pick("corpus", str, None),
        vocab=pick("vocab", str, None),
        threshold=pick("threshold", float, 0.7),
        k=k,
        min_len=pick("min_len", int, 1),
        max_len=pick("max_len", int, 5),
        seed=pick("seed", int, 0),
        text_variant=pick("text_variant", str, "full"),
        pairings=_parse_names(pairings_text) if pairings_text is not None else None,
        out=pick("out", str, "."),
        model=pick("model", str, None),
        thresholds=(
            _parse_floats(thresholds_text)
            if thresholds_text is not None
            else DEFAULT_SWEEP_THRESHOLDS
        ),
        free_text=pick("free_text", _parse_bool, False),
    )
    if not 0.0 < config.threshold <= 1.0:
        raise ValueError("invalid threshold")
    if not 1 <= config.min_len <= config.max_len:
        raise ValueError("invalid phrase length bounds")
    if config.k < 1:
        raise ValueError("invalid k")
    if config.text_variant not in TEXT_VARIANTS:
        raise ValueError(f"invalid text variant: {config.text_variant}")
    if config.pairings is not None:
        for name in config.pairings:
            if name not in PAIRING_NAMES:
                raise ValueError(f"unknown pairing: {name}")
    return config


# ---------------------------------------------------------------------------
# Corpus on disk


def corpus_paths(directory: str) -> list[tuple[str, Path, Path | None]]:
    root = Path(directory)
    if not root.is_dir():
        raise ValueError(f"corpus directory not found: {directory}")
    entries = []
    for txt in sorted(root.glob("*.txt")):
        key = txt.with_suffix(".key")
        entries.append((txt.stem, txt, key if key.exists() else None))
    if not entries:
        raise ValueError(f"no documents in corpus: {directory}")
    return entries


def _read_gold(path: Path) -> tuple[str, ...]:
    lines = path.read_text("utf-8").splitlines()
    return tuple(line.strip() for line in lines if line.strip())


def load_corpus(directory: str, require_gold: bool = False) -> list[Document]:
    docs = []
    for doc_id, txt, key in corpus_paths(directory):
        if require_gold and key is None:
            raise ValueError(f"missing gold keyphrases for document: {doc_id}")
        gold = _read_gold(key) if key is not None else None
        docs.append(document_from_text(doc_id, txt.read_text("utf-8"), gold))
    return docs


def _apply_variant(docs: Sequence[Document], variant: str, threshold: float) -> list[Document]:
    if variant == "full":
        return list(docs)
    out = []
    for doc in docs:
        partition = denoise(doc, threshold)
        kept = partition.denoised if variant == "denoised" else partition.noise
        out.append(document_from_sentences(doc.id, doc, kept))
    return out


def _out_dir(config: RunConfig) -> Path:
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_vocab(config: RunConfig):
    return load_vocabulary(config.vocab) if config.vocab else None


def _require_corpus(config: RunConfig) -> str:
    if not config.corpus:
        raise ValueError("missing --corpus")
    return config.corpus


# ---------------------------------------------------------------------------
# Commands


def cmd_denoise(config: RunConfig) -> int:
    out = _out_dir(config)
    docs = []
    failures = []
    for doc_id, txt, key in corpus_paths(_require_corpus(config)):
        try:
            raw = txt.read_text("utf-8")
        except (OSError, UnicodeDecodeError) as exc:
            failures.append(f"error: {doc_id}: {exc}")
            continue
        gold = _read_gold(key) if key is not None else None
        docs.append(document_from_text(doc_id, raw, gold))
    partitions, summary = denoise_corpus(docs, config.threshold)
    for doc in docs:
        part = partitions[doc.id]
        denoised_text = " ".join(sentence_text(doc, s) for s in part.denoised)
        noise_text = " ".join(sentence_text(doc, s) for s in part.noise)
        (out / f"{doc.id}.denoised.txt").write_text(denoised_text + "\n", encoding="utf-8")
        (out / f"{doc.id}.noise.txt").write_text(noise_text + "\n", encoding="utf-8")
    print(
        f"documents={summary.document_count} input_words={summary.total_words} "
        f"denoised_words={summary.denoised_words} noise_words={summary.noise_words}"
    )
    for line in failures:
        print(line, file=sys.stderr)
    return 1 if failures else 0


def _model_config(config: RunConfig) -> ModelConfig:
    return ModelConfig(
        min_len=config.min_len,
        max_len=config.max_len,
        matched_only=False if config.free_text else None,
        text_variant=config.text_variant,
        denoise_threshold=config.threshold if config.text_variant != "full" else None,
    )


def cmd_train(config: RunConfig) -> int:
    docs = load_corpus(_require_corpus(config), require_gold=True)
    vocabulary = _load_vocab(config)
    variant_docs = _apply_variant(docs, config.text_variant, config.threshold)
    model = train(variant_docs, vocabulary, _model_config(config))
    model_path = config.model or str(_out_dir(config) / "model.kpx")
    Path(model_path).parent.mkdir(parents=True, exist_ok=True)
    save_model(model, model_path)
    print(
        f"documents={len(docs)} instances={model.n_pos + model.n_neg} "
        f"positives={model.n_pos} model={model_path}"
    )
    return 0


def cmd_extract(config: RunConfig) -> int:
    if not config.model:
        raise ValueError("missing --model")
    model = load_model(config.model)
    vocabulary = _load_vocab(config)
    docs = load_corpus(_require_corpus(config), require_gold=False)
    docs = _apply_variant(docs, config.text_variant, config.threshold)
    out = _out_dir(config)
    for doc in docs:
        results = extract_top_k(model, doc, config.k, vocabulary)
        lines = [
            f"{rank}\t{r.surface_form}\t{r.score!r}"
            for rank, r in enumerate(results, start=1)
        ]
        body = "\n".join(lines) + "\n" if lines else ""
        (out / f"{doc.id}.keyphrases.tsv").write_text(body, encoding="utf-8")
    print(f"documents={len(docs)} k={config.k} out={out}")
    return 0


def _print_cv_table(report) -> None:
    print(f"{'pairing':<20}{'P':>8}{'R':>8}{'F':>8}{'t':>10}")
    for pairing in report.pairings:
        means = report.means[pairing]
        t_res = report.t_tests[pairing]
        if pairing == "Full-Full":
            t_cell = "-"
        else:
            t_cell = f"{t_res.t:.2f}" + ("*" if t_res.significant_05 else "")
        print(
            f"{pairing:<20}{means['precision']:>8.2f}{means['recall']:>8.2f}"
            f"{means['fscore']:>8.2f}{t_cell:>10}"
        )


def cmd_cv(config: RunConfig) -> int:
    docs = load_corpus(_require_corpus(config), require_gold=True)
    vocabulary = _load_vocab(config)
    pairings = config.pairings if config.pairings is not None else DEFAULT_CV_PAIRINGS
    report = cross_validate(
        docs,
        vocabulary,
        config.threshold,
        config.k,
        pairings,
        config.seed,
        config.min_len,
        config.max_len,
        False if config.free_text else None,
    )
    out = _out_dir(config)
    write_lines(report_csv_lines(report), str(out / "report.csv"))
    write_json(report_summary(report), str(out / "summary.json"))
    _print_cv_table(report)
    return 0


def cmd_sweep(config: RunConfig) -> int:
    docs = load_corpus(_require_corpus(config), require_gold=True)
    vocabulary = _load_vocab(config)
    pairings = config.pairings if config.pairings is not None else PAIRING_NAMES
    sweep = threshold_sweep(
        docs,
        vocabulary,
        config.thresholds,
        config.k,
        config.seed,
        pairings,
        config.min_len,
        config.max_len,
        False if config.free_text else None,
    )
    out = _out_dir(config)
    write_lines(sweep_csv_lines(sweep), str(out / "sweep.csv"))
    write_json(sweep_summary(sweep), str(out / "sweep_summary.json"))
    for pairing in sweep.pairings:
        best = sweep.argmin_threshold[pairing]
        print(
            f"pairing={pairing} argmin_threshold={best!r} "
            f"mean_error={sweep.mean_error[pairing][best]!r}"
        )
    return 0


_HANDLERS = {
    "denoise": cmd_denoise,
    "train": cmd_train,
    "extract": cmd_extract,
    "cv": cmd_cv,
    "sweep": cmd_sweep,
}


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = resolve_config(args)
        return _HANDLERS[config.command](config)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
