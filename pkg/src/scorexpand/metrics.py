"""Boundary-preservation metrics over token sequences.

Two similarity measures, each applied to the (past, new) and the
(new, future) segment pairs, and compared by subtraction:

- grooving similarity: per-bar binary onset vectors compared by
  ``1 - hamming/Q``, averaged over all cross pairs of bars;
- register similarity: 7-bin octave histograms (C1..B7) compared by
  negative cross entropy ``sum(h1 * log2(h2))``, which lies in (-inf, 0].

A positive ``delta_gs`` (or ``delta_rhs``) means the new segment is
closer in rhythm (or register) to the future context than to the past.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .midi_io import DEFAULT_POSITIONS_PER_BAR, QuantizedNote
from .tokenizer import TokenSequence, iter_bars

REGISTER_BINS = 7
REGISTER_LOW_C = 24        # MIDI C1, left edge of bin 0
SMOOTHING_EPS = 1e-6


class LengthMismatch(ValueError):
    """Vectors of different lengths passed to a pairwise comparison."""


class DomainError(ValueError):
    """Histogram outside the metric's domain (non-positive bin under log)."""


# ---------------------------------------------------------------------------
# grooving

def grooving_vector(bar: list[QuantizedNote], positions_per_bar: int) -> np.ndarray:
    """Binary onset vector of a bar: entry i is 1 iff any note starts at i."""
    vec = np.zeros(positions_per_bar, dtype=np.int8)
    for note in bar:
        vec[note.position] = 1
    return vec


def grooving_vectors(ts: TokenSequence, positions_per_bar: int = DEFAULT_POSITIONS_PER_BAR) -> list[np.ndarray]:
    """One onset vector per bar of a token sequence."""
    vectors = []
    for bar in iter_bars(ts):
        vec = np.zeros(positions_per_bar, dtype=np.int8)
        for token in bar:
            if token.kind == "POS":
                vec[token.value] = 1
        vectors.append(vec)
    return vectors


def gs_pair(a: np.ndarray, b: np.ndarray) -> float:
    """Similarity of two onset vectors: 1 - (hamming distance / Q)."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise LengthMismatch(f"grooving vectors of length {a.shape} vs {b.shape}")
    return 1.0 - np.count_nonzero(a != b) / a.size


def gs_segments(a: TokenSequence, b: TokenSequence,
                positions_per_bar: int = DEFAULT_POSITIONS_PER_BAR) -> float:
    """Mean gs_pair over all cross pairs (bar of a) x (bar of b).

    Bars without onsets enter as all-zero vectors, so two all-empty
    segments compare as identical (similarity 1).
    """
    vecs_a = grooving_vectors(a, positions_per_bar)
    vecs_b = grooving_vectors(b, positions_per_bar)
    if not vecs_a or not vecs_b:
        raise ValueError("gs_segments needs at least one bar on each side")
    total = 0.0
    for va in vecs_a:
        for vb in vecs_b:
            total += gs_pair(va, vb)
    return total / (len(vecs_a) * len(vecs_b))


# ---------------------------------------------------------------------------
# register histogram

def register_histogram(seg: TokenSequence) -> np.ndarray:
    """Normalized, smoothed 7-bin octave histogram of a segment's notes.

    Bin i covers pitches [24+12i, 35+12i] (octave C1..B1 up to C7..B7);
    pitches outside that span are clamped to the edge bins.  Counts are
    normalized to sum 1, then every bin gets +1e-6 and the histogram is
    renormalized so all bins are strictly positive.  A segment with no
    notes yields the uniform histogram.
    """
    counts = np.zeros(REGISTER_BINS, dtype=float)
    for token in seg:
        if token.kind == "PITCH":
            octave = (token.value - REGISTER_LOW_C) // 12
            counts[min(max(octave, 0), REGISTER_BINS - 1)] += 1
    total = counts.sum()
    if total == 0:
        return np.full(REGISTER_BINS, 1.0 / REGISTER_BINS)
    hist = counts / total + SMOOTHING_EPS
    return hist / hist.sum()


def rhs(h1: np.ndarray, h2: np.ndarray) -> float:
    """Negative cross entropy sum(h1_i * log2(h2_i)) over the 7 bins.

    Always <= 0; for a fixed h1 it is maximized when h2 equals h1.  h2
    must be strictly positive everywhere (i.e. smoothed); h1 may be any
    non-negative weight vector, e.g. a raw one-hot.
    """
    h1 = np.asarray(h1, dtype=float)
    h2 = np.asarray(h2, dtype=float)
    if h1.shape != h2.shape:
        raise LengthMismatch(f"histograms of shape {h1.shape} vs {h2.shape}")
    if np.any(h2 <= 0):
        raise DomainError("second histogram has a non-positive bin; smooth it first")
    return float(np.dot(h1, np.log2(h2)))


# ---------------------------------------------------------------------------
# subtraction analysis

@dataclass(frozen=True)
class BoundaryAnalysis:
    """Similarities across the two seams of (past, new, future)."""

    gs1: float       # grooving similarity (past, new)
    gs2: float       # grooving similarity (new, future)
    rhs1: float      # register similarity (past, new)
    rhs2: float      # register similarity (new, future)
    delta_gs: float  # gs2 - gs1
    delta_rhs: float  # rhs2 - rhs1

    def as_dict(self) -> dict[str, float]:
        return {
            "gs1": self.gs1, "gs2": self.gs2, "delta_gs": self.delta_gs,
            "rhs1": self.rhs1, "rhs2": self.rhs2, "delta_rhs": self.delta_rhs,
        }


def boundary_analysis(past: TokenSequence, new: TokenSequence, future: TokenSequence,
                      positions_per_bar: int = DEFAULT_POSITIONS_PER_BAR) -> BoundaryAnalysis:
    """Compare the generated segment against both of its contexts."""
    gs1 = gs_segments(past, new, positions_per_bar)
    gs2 = gs_segments(new, future, positions_per_bar)
    rhs1 = rhs(register_histogram(past), register_histogram(new))
    rhs2 = rhs(register_histogram(new), register_histogram(future))
    return BoundaryAnalysis(gs1=gs1, gs2=gs2, rhs1=rhs1, rhs2=rhs2,
                            delta_gs=gs2 - gs1, delta_rhs=rhs2 - rhs1)
