import random
from pathlib import Path

import pytest

from scorexpand.midi_io import NoteEvent, QuantizedNote, QuantizedScore, Score

FIXTURES_DIR = Path(__file__).resolve().parent.parent / "fixtures"


@pytest.fixture
def fixtures_dir() -> Path:
    if not FIXTURES_DIR.is_dir():
        pytest.skip("bundled fixtures not present")
    return FIXTURES_DIR


def smf_bytes(fmt: int, tpq: int, *track_payloads: bytes) -> bytes:
    """Assemble an SMF file from raw track event bytes."""
    out = b"MThd" + (6).to_bytes(4, "big")
    out += fmt.to_bytes(2, "big") + len(track_payloads).to_bytes(2, "big")
    out += tpq.to_bytes(2, "big")
    for payload in track_payloads:
        out += b"MTrk" + len(payload).to_bytes(4, "big") + payload
    return out


def random_score(rng: random.Random, n_notes: int, tpq: int = 480) -> Score:
    notes = [
        NoteEvent(
            pitch=rng.randrange(0, 128),
            onset=rng.randrange(0, 16 * 4 * tpq),
            duration=rng.randrange(1, 2 * 4 * tpq),
            velocity=rng.randrange(1, 128),
        )
        for _ in range(n_notes)
    ]
    notes.sort(key=lambda n: (n.onset, n.pitch, n.duration, n.velocity))
    return Score(ticks_per_quarter=tpq, notes=notes)


def random_quantized(rng: random.Random, q: int = 16, n_bars: int = 4,
                     max_notes: int = 6) -> QuantizedScore:
    bars = []
    for _ in range(n_bars):
        bar = [
            QuantizedNote(
                position=rng.randrange(0, q),
                pitch=rng.randrange(22, 108),
                duration=rng.randrange(1, 2 * q + 1),
                velocity=rng.randrange(1, 128),
            )
            for _ in range(rng.randrange(0, max_notes + 1))
        ]
        bar.sort(key=lambda n: (n.position, n.pitch, n.duration, n.velocity))
        bars.append(bar)
    return QuantizedScore(positions_per_bar=q, bars=bars)
