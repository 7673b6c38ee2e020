"""scorexpand: expand symbolic scores at musical boundaries.

The pipeline: parse a MIDI file, quantize it onto a bar/position grid,
encode it as event tokens, split it at a boundary bar, fill an artificial
gap with a pluggable infiller, and measure how well the boundary survives
using grooving-pattern similarity and register-histogram similarity.
"""

from .expansion import (CopyFutureInfiller, CopyPastInfiller, ExpansionRequest, InfillError,
                        MarkovInfiller, MarkovModel, RandomInfiller, expand, load_markov_model,
                        save_markov_model, split_at_boundary, train_markov)
from .harness import (ExperimentConfig, PieceResult, emit_results, load_annotations,
                      load_config, run_experiment)
from .metrics import (BoundaryAnalysis, boundary_analysis, gs_pair, gs_segments,
                      grooving_vector, register_histogram, rhs)
from .midi_io import (NoteEvent, ParseError, QuantizedNote, QuantizedScore, Score,
                      parse_midi, quantize, to_score, write_midi)
from .tokenizer import (GrammarError, RangeError, Token, bar_count, decode, encode,
                        from_text, slice_bars, to_text)

__version__ = "0.1.0"

__all__ = [
    "BoundaryAnalysis", "CopyFutureInfiller", "CopyPastInfiller", "ExpansionRequest",
    "ExperimentConfig", "GrammarError", "InfillError", "MarkovInfiller", "MarkovModel",
    "NoteEvent", "ParseError", "PieceResult", "QuantizedNote", "QuantizedScore",
    "RandomInfiller", "RangeError", "Score", "Token", "bar_count", "boundary_analysis",
    "decode", "emit_results", "encode", "expand", "from_text", "grooving_vector",
    "gs_pair", "gs_segments", "load_annotations", "load_config", "load_markov_model",
    "parse_midi", "quantize", "register_histogram", "rhs", "run_experiment",
    "save_markov_model", "slice_bars", "split_at_boundary", "to_score", "to_text",
    "train_markov", "write_midi",
]
