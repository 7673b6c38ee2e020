"""Batch experiment runner: corpus in, expanded MIDI + metrics out.

Given a directory of MIDI files and a JSON annotation file mapping each
piece to its boundary bar, every annotated piece is parsed, quantized,
encoded, expanded with the configured infiller, evaluated at both seams,
and written back out as an expanded MIDI file.  Per-piece failures become
error rows; the batch keeps going.

The whole run is deterministic for a fixed config: each piece's infill
seed is ``global seed XOR sha256(piece_id)[:8]``, so adding or removing
corpus files never changes the other pieces' output.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

from . import expansion, metrics, midi_io, tokenizer

RESULT_COLUMNS = ["piece_id", "boundary_bar", "bars_in", "bars_out",
                  "gs1", "gs2", "delta_gs", "rhs1", "rhs2", "delta_rhs"]

INFILLER_NAMES = ("copy-past", "copy-future", "markov", "random")


class SchemaError(ValueError):
    """Annotation or config file content outside the documented schema."""


class EmptyAnnotations(ValueError):
    """Annotation file holds no entries."""


class MissingAnnotation(UserWarning):
    """A corpus file has no annotation entry and is skipped."""


@dataclass
class ExperimentConfig:
    corpus_dir: Path
    annotations: Path
    output_dir: Path
    gap_bars: int = 4
    infiller: str = "copy-future"
    markov_model: Path | None = None   # trained model for infiller "markov"
    markov_order: int = 2              # used to train on the corpus when no model given
    seed: int = 0
    positions_per_bar: int = midi_io.DEFAULT_POSITIONS_PER_BAR

    def __post_init__(self):
        self.corpus_dir = Path(self.corpus_dir)
        self.annotations = Path(self.annotations)
        self.output_dir = Path(self.output_dir)
        if self.markov_model is not None:
            self.markov_model = Path(self.markov_model)
        if self.gap_bars < 1:
            raise SchemaError("gap_bars must be >= 1")
        if self.infiller not in INFILLER_NAMES:
            raise SchemaError(f"unknown infiller {self.infiller!r}; choose from {INFILLER_NAMES}")
        if not self.corpus_dir.is_dir():
            raise SchemaError(f"corpus_dir {self.corpus_dir} is not a directory")
        if not self.annotations.is_file():
            raise SchemaError(f"annotations file {self.annotations} does not exist")


def load_config(path: str | Path, overrides: dict | None = None) -> ExperimentConfig:
    """Read a JSON config file; relative paths resolve against the file.

    ``overrides`` (already-parsed flag values) replace file values.
    """
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(doc, dict):
        raise SchemaError(f"{path}: config must be a JSON object")
    known = {f for f in ExperimentConfig.__dataclass_fields__}
    unknown = set(doc) - known
    if unknown:
        raise SchemaError(f"{path}: unknown config keys {sorted(unknown)}")
    base = path.parent
    for key in ("corpus_dir", "annotations", "output_dir", "markov_model"):
        if doc.get(key) is not None:
            doc[key] = base / doc[key]
    if overrides:
        doc.update({k: v for k, v in overrides.items() if v is not None})
    missing = {"corpus_dir", "annotations", "output_dir"} - set(doc)
    if missing:
        raise SchemaError(f"{path}: missing config keys {sorted(missing)}")
    try:
        return ExperimentConfig(**doc)
    except TypeError as exc:
        raise SchemaError(f"{path}: {exc}") from exc


@dataclass
class PieceResult:
    piece_id: str
    boundary_bar: int | None = None
    bars_in: int | None = None
    bars_out: int | None = None
    gs1: float | None = None
    gs2: float | None = None
    delta_gs: float | None = None
    rhs1: float | None = None
    rhs2: float | None = None
    delta_rhs: float | None = None
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None

    def as_dict(self) -> dict:
        row = {col: getattr(self, col) for col in RESULT_COLUMNS}
        if self.error is not None:
            row["error"] = self.error
        return row


def load_annotations(path: str | Path) -> dict[str, int]:
    """Read the annotation schema: a JSON list of
    ``{"file": <name>, "boundary_bar": <int >= 1>}``."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(doc, list):
        raise SchemaError(f"{path}: annotations must be a JSON list")
    if not doc:
        raise EmptyAnnotations(f"{path}: annotation list is empty")
    annotations: dict[str, int] = {}
    for i, entry in enumerate(doc):
        if not isinstance(entry, dict):
            raise SchemaError(f"{path}: entry {i} is not an object")
        if "file" not in entry or "boundary_bar" not in entry:
            raise SchemaError(f"{path}: entry {i} needs 'file' and 'boundary_bar'")
        name = entry["file"]
        boundary = entry["boundary_bar"]
        if not isinstance(name, str) or not name:
            raise SchemaError(f"{path}: entry {i}: 'file' must be a non-empty string")
        if not isinstance(boundary, int) or isinstance(boundary, bool) or boundary < 1:
            raise SchemaError(
                f"{path}: entry {i} ({name}): boundary_bar must be an integer >= 1")
        if name in annotations:
            raise SchemaError(f"{path}: duplicate annotation for {name}")
        annotations[name] = boundary
    return annotations


def piece_seed(global_seed: int, piece_id: str) -> int:
    """Stable per-piece seed: global seed XOR first 8 bytes of sha256(id)."""
    digest = hashlib.sha256(piece_id.encode("utf-8")).digest()
    return (global_seed ^ int.from_bytes(digest[:8], "big")) & (2 ** 64 - 1)


def _corpus_sequences(config: ExperimentConfig, names: list[str]) -> list[list[tokenizer.Token]]:
    sequences = []
    for name in names:
        try:
            score = midi_io.parse_midi((config.corpus_dir / name).read_bytes())
            sequences.append(tokenizer.encode(midi_io.quantize(score, config.positions_per_bar)))
        except (OSError, midi_io.ParseError):
            continue
    return sequences


def build_infiller(config: ExperimentConfig, corpus_names: list[str]):
    """Construct the configured infiller.

    "markov" loads ``markov_model`` when given; otherwise it trains an
    order-``markov_order`` model on the experiment corpus itself.
    """
    if config.infiller == "copy-past":
        return expansion.CopyPastInfiller()
    if config.infiller == "copy-future":
        return expansion.CopyFutureInfiller()
    if config.infiller == "random":
        return expansion.RandomInfiller(positions_per_bar=config.positions_per_bar)
    if config.markov_model is not None:
        return expansion.MarkovInfiller(expansion.load_markov_model(config.markov_model))
    model = expansion.train_markov(_corpus_sequences(config, corpus_names), config.markov_order)
    return expansion.MarkovInfiller(model)


def run_piece(config: ExperimentConfig, infiller, piece_id: str, boundary: int) -> PieceResult:
    q = config.positions_per_bar
    result = PieceResult(piece_id=piece_id, boundary_bar=boundary)
    try:
        data = (config.corpus_dir / piece_id).read_bytes()
        score = midi_io.parse_midi(data)
        ts = tokenizer.encode(midi_io.quantize(score, q))
        bars_in = tokenizer.bar_count(ts)
        result.bars_in = bars_in
        if not 1 <= boundary < bars_in:
            raise ValueError(f"boundary_bar {boundary} outside piece of {bars_in} bars")
        expanded = expansion.expand(ts, boundary, config.gap_bars, infiller,
                                    piece_seed(config.seed, piece_id))
        past = tokenizer.slice_bars(expanded, 0, boundary)
        new = tokenizer.slice_bars(expanded, boundary, boundary + config.gap_bars)
        future = tokenizer.slice_bars(expanded, boundary + config.gap_bars,
                                      bars_in + config.gap_bars)
        analysis = metrics.boundary_analysis(past, new, future, q)

        out_path = config.output_dir / piece_id
        out_path.write_bytes(midi_io.write_midi(midi_io.to_score(tokenizer.decode(expanded, q))))

        result.bars_out = tokenizer.bar_count(expanded)
        for name, value in analysis.as_dict().items():
            setattr(result, name, value)
    except (OSError, ValueError, LookupError, expansion.InfillError) as exc:
        result.error = str(exc)
    return result


def run_experiment(config: ExperimentConfig) -> list[PieceResult]:
    """Expand and evaluate every annotated piece; results sorted by id.

    Corpus files without an annotation are skipped with a
    MissingAnnotation warning; annotated files that fail to parse or
    process become error rows and the run continues.
    """
    annotations = load_annotations(config.annotations)
    corpus_names = sorted(p.name for p in config.corpus_dir.iterdir()
                          if p.suffix.lower() in (".mid", ".midi"))
    for name in corpus_names:
        if name not in annotations:
            warnings.warn(f"{name}: no annotation entry; piece skipped", MissingAnnotation)

    config.output_dir.mkdir(parents=True, exist_ok=True)
    infiller = build_infiller(config, corpus_names)
    return [run_piece(config, infiller, piece_id, boundary)
            for piece_id, boundary in sorted(annotations.items())]


# ---------------------------------------------------------------------------
# result files

def _summary_stats(values: list[float]) -> dict:
    if not values:
        return {"mean": None, "stddev": None, "positive": 0}
    mean = sum(values) / len(values)
    var = sum((v - mean) ** 2 for v in values) / len(values)
    return {"mean": mean, "stddev": math.sqrt(var),
            "positive": sum(1 for v in values if v > 0)}


def emit_results(results: list[PieceResult], output_dir: str | Path) -> dict[str, Path]:
    """Write results.csv, results.json and summary.json.

    The CSV keeps the documented 10-column order; error rows leave the
    metric cells empty and carry their message only in results.json.
    """
    if not results:
        raise ValueError("emit_results needs at least one result")
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    paths = {
        "results_csv": output_dir / "results.csv",
        "results_json": output_dir / "results.json",
        "summary": output_dir / "summary.json",
    }

    with open(paths["results_csv"], "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(RESULT_COLUMNS)
        for r in results:
            writer.writerow(["" if v is None else v
                             for v in (getattr(r, col) for col in RESULT_COLUMNS)])

    with open(paths["results_json"], "w") as fh:
        json.dump([r.as_dict() for r in results], fh, indent=1)
        fh.write("\n")

    ok = [r for r in results if r.ok]
    summary = {
        "count": len(ok),
        "errors": len(results) - len(ok),
        "delta_gs": _summary_stats([r.delta_gs for r in ok]),
        "delta_rhs": _summary_stats([r.delta_rhs for r in ok]),
    }
    with open(paths["summary"], "w") as fh:
        json.dump(summary, fh, indent=1)
        fh.write("\n")
    return paths
