#!/usr/bin/env python3
"""Regenerate the bundled fixture corpus (fixtures/*.mid + annotations).

Twenty synthetic 12-bar piano pieces, grid-aligned at 16 positions per
bar (tpq 480).  Each piece changes character at its annotated boundary:

- rhythm: bars before the boundary place onsets only on even grid
  positions, bars after only on odd ones (disjoint onset sets);
- register: notes before the boundary sit in octaves 1-2 (MIDI 24-47),
  after in octaves 5-6 (MIDI 72-95).

That contrast is what the copy-infiller sign checks in the test suite
rely on, so regenerate with care.  Deterministic: a fixed seed, stable
output bytes.
"""

import json
import random
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from scorexpand.midi_io import NoteEvent, Score, write_midi  # noqa: E402

TPQ = 480
STEP = 120            # ticks per grid position at Q=16
BARS = 12
N_PIECES = 20
BOUNDARIES = [8, 8, 8, 8, 6, 6, 6, 6, 4, 4, 8, 6, 4, 8, 6, 4, 8, 8, 6, 4]

PAST_POSITIONS = [0, 2, 4, 6, 8, 10, 12, 14]
FUTURE_POSITIONS = [1, 3, 5, 7, 9, 11, 13, 15]
PAST_PITCHES = list(range(24, 48))     # octaves 1-2
FUTURE_PITCHES = list(range(72, 96))   # octaves 5-6


def make_piece(rng: random.Random, boundary: int) -> Score:
    past_onsets = sorted(rng.sample(PAST_POSITIONS, rng.randint(3, 5)))
    future_onsets = sorted(rng.sample(FUTURE_POSITIONS, rng.randint(3, 5)))
    notes = []
    for bar in range(BARS):
        in_past = bar < boundary
        onsets = past_onsets if in_past else future_onsets
        pitches = PAST_PITCHES if in_past else FUTURE_PITCHES
        root = rng.choice(pitches[:12])
        for i, pos in enumerate(onsets):
            pitch = pitches[(pitches.index(root) + 5 * i) % len(pitches)]
            notes.append(NoteEvent(
                pitch=pitch,
                onset=(bar * 16 + pos) * STEP,
                duration=rng.choice([1, 2, 2, 4]) * STEP,
                velocity=rng.randint(48, 100),
            ))
    notes.sort(key=lambda n: (n.onset, n.pitch, n.duration, n.velocity))
    return Score(ticks_per_quarter=TPQ, notes=notes)


def main() -> None:
    out_dir = Path(__file__).resolve().parent.parent / "fixtures"
    out_dir.mkdir(exist_ok=True)
    rng = random.Random(0x5EED)
    annotations = []
    for i in range(N_PIECES):
        name = f"piece_{i + 1:02d}.mid"
        score = make_piece(rng, BOUNDARIES[i])
        (out_dir / name).write_bytes(write_midi(score))
        annotations.append({"file": name, "boundary_bar": BOUNDARIES[i]})
    (out_dir / "annotations.json").write_text(json.dumps(annotations, indent=1) + "\n")
    (out_dir / "experiment.json").write_text(json.dumps({
        "corpus_dir": ".",
        "annotations": "annotations.json",
        "output_dir": "../out",
        "gap_bars": 4,
        "infiller": "copy-future",
        "seed": 17,
        "positions_per_bar": 16,
    }, indent=1) + "\n")
    print(f"wrote {N_PIECES} pieces + annotations to {out_dir}")


if __name__ == "__main__":
    main()
