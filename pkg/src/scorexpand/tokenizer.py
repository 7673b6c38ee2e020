"""Bar-structured event tokens and their codec.

A quantized score is encoded as a flat token stream with the grammar

    sequence := bar+
    bar      := BAR (POS PITCH DUR VEL)*

where the note groups inside a bar appear with non-decreasing positions.
Every context handed to an infiller, and everything an infiller returns,
is such a sequence.  The debug text form is one token per line, e.g.
``BAR`` / ``POS 0`` / ``PITCH 60`` / ``DUR 4`` / ``VEL 5``.
"""

from __future__ import annotations

from typing import Iterable, NamedTuple, Sequence

from .midi_io import DEFAULT_POSITIONS_PER_BAR, MAX_DURATION_BARS, QuantizedNote, QuantizedScore

PITCH_MIN = 22   # clamp range: 88-key piano plus a small margin
PITCH_MAX = 107
VELOCITY_BINS = 8


class GrammarError(ValueError):
    """A token stream that violates the bar/note grammar."""

    def __init__(self, index: int, expected: str, found: "Token | None"):
        self.index = index
        self.expected = expected
        self.found = found
        got = "end of sequence" if found is None else str(found)
        super().__init__(f"token {index}: expected {expected}, found {got}")


class RangeError(IndexError):
    """A bar index outside the sequence being sliced or split."""


class Token(NamedTuple):
    kind: str            # "BAR" | "POS" | "PITCH" | "DUR" | "VEL"
    value: int | None = None

    def __str__(self) -> str:
        return self.kind if self.value is None else f"{self.kind} {self.value}"


BAR = Token("BAR")


def position(p: int) -> Token:
    return Token("POS", p)


def pitch(n: int) -> Token:
    return Token("PITCH", n)


def duration(d: int) -> Token:
    return Token("DUR", d)


def velocity(v: int) -> Token:
    return Token("VEL", v)


TokenSequence = Sequence[Token]


# ---------------------------------------------------------------------------
# velocity binning: 8 equal-width bins over MIDI velocities [1, 127]

def velocity_bin(v: int) -> int:
    """Map velocity 1..127 to bin 0..7 (width 126/8 = 15.75)."""
    return min(VELOCITY_BINS - 1, (v - 1) * 4 // 63)


def velocity_from_bin(b: int) -> int:
    """Bin midpoint, rounded half-up; re-binning it returns ``b``."""
    return (126 * b + 75) // 8


# ---------------------------------------------------------------------------
# grammar state machine

class GrammarState:
    """Tracks which tokens may legally come next in a sequence.

    ``positions_per_bar=None`` skips the Q-dependent upper-range checks
    (used when masking model output whose Q is fixed by its vocabulary).
    """

    def __init__(self, positions_per_bar: int | None = DEFAULT_POSITIONS_PER_BAR):
        self.q = positions_per_bar
        self.expect = "bar"          # "bar" | "note_or_bar" | "pitch" | "dur" | "vel"
        self.last_position: int | None = None

    def describe_expected(self) -> str:
        return {
            "bar": "BAR",
            "note_or_bar": "BAR or POS"
            + ("" if self.last_position is None else f" >= {self.last_position}"),
            "pitch": "PITCH",
            "dur": "DUR",
            "vel": "VEL",
        }[self.expect]

    def is_legal(self, token: Token) -> bool:
        kind, value = token
        if self.expect == "bar":
            return kind == "BAR"
        if self.expect == "note_or_bar":
            if kind == "BAR":
                return True
            if kind != "POS" or value is None or value < 0:
                return False
            if self.q is not None and value >= self.q:
                return False
            return self.last_position is None or value >= self.last_position
        if self.expect == "pitch":
            return kind == "PITCH" and value is not None and PITCH_MIN <= value <= PITCH_MAX
        if self.expect == "dur":
            if kind != "DUR" or value is None or value < 1:
                return False
            return self.q is None or value <= MAX_DURATION_BARS * self.q
        return kind == "VEL" and value is not None and 0 <= value < VELOCITY_BINS

    def advance(self, token: Token) -> None:
        if token.kind == "BAR":
            self.expect = "note_or_bar"
            self.last_position = None
        elif token.kind == "POS":
            self.expect = "pitch"
            self.last_position = token.value
        elif token.kind == "PITCH":
            self.expect = "dur"
        elif token.kind == "DUR":
            self.expect = "vel"
        else:  # VEL
            self.expect = "note_or_bar"

    @property
    def at_bar_boundary(self) -> bool:
        return self.expect == "note_or_bar"


# ---------------------------------------------------------------------------
# codec

def encode(qs: QuantizedScore) -> list[Token]:
    """Encode a quantized score, one BAR token per bar (empty bars too).

    Notes are emitted in (position, pitch) order; out-of-range pitches are
    clamped to [22, 107]; velocities are mapped to their 8-bin index.
    """
    tokens: list[Token] = []
    for bar in qs.bars:
        tokens.append(BAR)
        for note in sorted(bar, key=lambda n: (n.position, n.pitch, n.duration, n.velocity)):
            tokens.append(position(note.position))
            tokens.append(pitch(min(max(note.pitch, PITCH_MIN), PITCH_MAX)))
            tokens.append(duration(note.duration))
            tokens.append(velocity(velocity_bin(note.velocity)))
    return tokens


def decode(ts: TokenSequence, positions_per_bar: int = DEFAULT_POSITIONS_PER_BAR) -> QuantizedScore:
    """Decode a token sequence back to a quantized score.

    Raises GrammarError on malformed streams.  Velocities come back as
    their bin midpoints, everything else round-trips exactly.
    """
    state = GrammarState(positions_per_bar)
    bars: list[list[QuantizedNote]] = []
    note: list[int] = []
    for i, token in enumerate(ts):
        if not state.is_legal(token):
            raise GrammarError(i, state.describe_expected(), token)
        state.advance(token)
        if token.kind == "BAR":
            bars.append([])
        else:
            note.append(token.value)
            if token.kind == "VEL":
                pos, pit, dur, vel = note
                bars[-1].append(QuantizedNote(pos, pit, dur, velocity_from_bin(vel)))
                note = []
    if not bars:
        raise GrammarError(0, "BAR", None)
    if not state.at_bar_boundary:
        raise GrammarError(len(ts), state.describe_expected(), None)
    return QuantizedScore(positions_per_bar=positions_per_bar, bars=bars)


def validate(ts: TokenSequence, positions_per_bar: int | None = None) -> None:
    """Raise GrammarError unless ``ts`` is a well-formed sequence."""
    state = GrammarState(positions_per_bar)
    for i, token in enumerate(ts):
        if not state.is_legal(token):
            raise GrammarError(i, state.describe_expected(), token)
        state.advance(token)
    if not ts:
        raise GrammarError(0, "BAR", None)
    if not state.at_bar_boundary:
        raise GrammarError(len(ts), state.describe_expected(), None)


# ---------------------------------------------------------------------------
# bar arithmetic

def bar_count(ts: TokenSequence) -> int:
    return sum(1 for t in ts if t.kind == "BAR")


def _bar_starts(ts: TokenSequence) -> list[int]:
    return [i for i, t in enumerate(ts) if t.kind == "BAR"]


def slice_bars(ts: TokenSequence, start: int, stop: int) -> list[Token]:
    """Tokens of bars [start, stop); concatenating a partition of [0, N)
    reproduces the sequence token-exactly."""
    starts = _bar_starts(ts)
    n = len(starts)
    if not 0 <= start < stop <= n:
        raise RangeError(f"bar slice [{start}, {stop}) outside sequence of {n} bars")
    lo = starts[start]
    hi = starts[stop] if stop < n else len(ts)
    return list(ts[lo:hi])


def iter_bars(ts: TokenSequence) -> Iterable[list[Token]]:
    """Yield each bar's tokens (BAR token included)."""
    starts = _bar_starts(ts)
    for i, lo in enumerate(starts):
        hi = starts[i + 1] if i + 1 < len(starts) else len(ts)
        yield list(ts[lo:hi])


# ---------------------------------------------------------------------------
# debug text form

def to_text(ts: TokenSequence) -> str:
    return "\n".join(str(t) for t in ts) + "\n"


def from_text(text: str) -> list[Token]:
    tokens = []
    for line_no, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] not in ("BAR", "POS", "PITCH", "DUR", "VEL"):
            raise ValueError(f"line {line_no}: unknown token kind {parts[0]!r}")
        if parts[0] == "BAR":
            if len(parts) != 1:
                raise ValueError(f"line {line_no}: BAR takes no value")
            tokens.append(BAR)
        else:
            if len(parts) != 2:
                raise ValueError(f"line {line_no}: expected '{parts[0]} <int>'")
            tokens.append(Token(parts[0], int(parts[1])))
    return tokens
