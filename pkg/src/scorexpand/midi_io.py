"""Standard MIDI File reading/writing and bar-grid quantization.

The parser handles SMF formats 0 and 1 and extracts plain note events;
everything else in the file (tempo map, program changes, controllers,
lyrics) is skipped.  Output is always format 0 with a fixed 120 BPM tempo
and a 4/4 time signature.  The whole module assumes 4/4 metre: one bar is
exactly ``4 * ticks_per_quarter`` ticks, and files declaring any other
time signature are rejected.

Functions
---------
- parse_midi(data): SMF bytes -> Score.
- write_midi(score): Score -> SMF bytes (format 0, explicit note-offs).
- quantize(score, positions_per_bar): snap notes onto a Q-per-bar grid.
- to_score(qs, ticks_per_quarter): put a quantized score back on a tick
  timeline (exact inverse of quantize for grid-aligned material).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import NamedTuple

DEFAULT_POSITIONS_PER_BAR = 16
# Longest representable quantized duration, in bars.
MAX_DURATION_BARS = 2

_PERCUSSION_CHANNEL = 9  # MIDI channel 10, dropped on parse
_TEMPO_120_BPM = 500_000  # microseconds per quarter note


class ParseError(ValueError):
    """Raised for malformed or unsupported SMF input."""

    def __init__(self, offset: int, reason: str):
        self.offset = offset
        self.reason = reason
        super().__init__(f"bad MIDI data at byte {offset}: {reason}")


class NoteEvent(NamedTuple):
    """One sounding note on the raw tick timeline."""

    pitch: int      # MIDI note number, 0..127
    onset: int      # ticks, >= 0
    duration: int   # ticks, >= 1
    velocity: int   # 1..127


@dataclass
class Score:
    """Parsed MIDI content: a tick resolution plus a sorted note list.

    Invariant: ``notes`` is sorted by (onset, pitch); ties broken by
    (duration, velocity) so equal-sounding files compare equal.
    """

    ticks_per_quarter: int
    notes: list[NoteEvent] = field(default_factory=list)


class QuantizedNote(NamedTuple):
    """A note snapped to the bar grid; duration in grid units."""

    position: int   # 0..Q-1 within its bar
    pitch: int
    duration: int   # grid units, 1..2Q
    velocity: int


@dataclass
class QuantizedScore:
    """Notes grouped into bars on a Q-positions-per-bar grid."""

    positions_per_bar: int
    bars: list[list[QuantizedNote]]


def _note_key(n: NoteEvent):
    return (n.onset, n.pitch, n.duration, n.velocity)


# ---------------------------------------------------------------------------
# parsing

def _read_u16(data: bytes, i: int) -> int:
    if i + 2 > len(data):
        raise ParseError(i, "truncated (expected 16-bit value)")
    return int.from_bytes(data[i:i + 2], "big")


def _read_u32(data: bytes, i: int) -> int:
    if i + 4 > len(data):
        raise ParseError(i, "truncated (expected 32-bit value)")
    return int.from_bytes(data[i:i + 4], "big")


def _read_varlen(data: bytes, i: int) -> tuple[int, int]:
    """Variable-length quantity at ``i``; returns (value, next offset)."""
    value = 0
    for _ in range(4):
        if i >= len(data):
            raise ParseError(i, "truncated variable-length quantity")
        byte = data[i]
        i += 1
        value = (value << 7) | (byte & 0x7F)
        if not byte & 0x80:
            return value, i
    raise ParseError(i, "variable-length quantity longer than 4 bytes")


def _channel_msg_len(status: int) -> int:
    return 1 if status & 0xF0 in (0xC0, 0xD0) else 2


def _parse_track(data: bytes, start: int, end: int, notes: list[NoteEvent]) -> None:
    """Collect NoteEvents from one MTrk chunk body (bytes start..end)."""
    i = start
    tick = 0
    running_status = None
    # (channel, pitch) -> FIFO of (onset tick, velocity) for open notes
    open_notes: dict[tuple[int, int], list[tuple[int, int]]] = {}

    def close(channel: int, pitch: int, off_tick: int) -> None:
        stack = open_notes.get((channel, pitch))
        if not stack:
            return
        onset, vel = stack.pop(0)
        notes.append(NoteEvent(pitch, onset, max(1, off_tick - onset), vel))

    while i < end:
        delta, i = _read_varlen(data, i)
        tick += delta
        if i >= end:
            raise ParseError(i, "truncated track event")
        status = data[i]
        if status < 0x80:
            if running_status is None:
                raise ParseError(i, f"data byte 0x{status:02x} without running status")
            status = running_status
        else:
            i += 1

        if status < 0xF0:  # channel message
            running_status = status
            length = _channel_msg_len(status)
            if i + length > end:
                raise ParseError(i, "truncated channel message")
            payload = data[i:i + length]
            i += length
            kind = status & 0xF0
            channel = status & 0x0F
            if channel == _PERCUSSION_CHANNEL:
                continue
            if kind == 0x90 and payload[1] > 0:
                open_notes.setdefault((channel, payload[0]), []).append((tick, payload[1]))
            elif kind == 0x80 or (kind == 0x90 and payload[1] == 0):
                close(channel, payload[0], tick)
        elif status == 0xFF:  # meta event
            running_status = None
            if i >= end:
                raise ParseError(i, "truncated meta event")
            meta_type = data[i]
            length, j = _read_varlen(data, i + 1)
            if j + length > end:
                raise ParseError(j, "truncated meta event payload")
            payload = data[j:j + length]
            i = j + length
            if meta_type == 0x58 and len(payload) >= 2:
                numerator, denom_pow = payload[0], payload[1]
                if (numerator, denom_pow) != (4, 2):
                    raise ParseError(
                        j, f"unsupported time signature {numerator}/{2 ** denom_pow}"
                        " (only 4/4 is handled)")
            elif meta_type == 0x2F:
                break  # end of track
        elif status in (0xF0, 0xF7):  # sysex
            running_status = None
            length, i = _read_varlen(data, i)
            if i + length > end:
                raise ParseError(i, "truncated sysex payload")
            i += length
        else:
            raise ParseError(i - 1, f"unexpected status byte 0x{status:02x}")

    for (channel, pitch), stack in sorted(open_notes.items()):
        for onset, vel in stack:
            warnings.warn(
                f"note-on (pitch {pitch}, tick {onset}) without matching note-off;"
                " closed at end of track")
            notes.append(NoteEvent(pitch, onset, max(1, tick - onset), vel))


def parse_midi(data: bytes) -> Score:
    """Parse SMF bytes into a Score.

    Accepts format 0 and 1 files; all tracks are merged into a single note
    list sorted by (onset, pitch).  A note-on with velocity 0 counts as a
    note-off.  Percussion (channel 10) is dropped, tempo and program
    changes are ignored, and non-4/4 time signature events are rejected.
    A note-on left open at the end of its track is closed there with a
    warning rather than an error.
    """
    if data[0:4] != b"MThd":
        raise ParseError(0, "missing MThd header chunk")
    header_len = _read_u32(data, 4)
    if header_len < 6:
        raise ParseError(4, f"header chunk length {header_len} < 6")
    fmt = _read_u16(data, 8)
    if fmt not in (0, 1):
        raise ParseError(8, f"unsupported SMF format {fmt}")
    n_tracks = _read_u16(data, 10)
    division = _read_u16(data, 12)
    if division & 0x8000:
        raise ParseError(12, "SMPTE time division is not supported")
    if division == 0:
        raise ParseError(12, "time division of zero ticks per quarter")

    notes: list[NoteEvent] = []
    i = 8 + header_len
    tracks_seen = 0
    while tracks_seen < n_tracks:
        if i >= len(data):
            raise ParseError(i, f"expected {n_tracks} tracks, found {tracks_seen}")
        chunk_type = data[i:i + 4]
        chunk_len = _read_u32(data, i + 4)
        body = i + 8
        if body + chunk_len > len(data):
            raise ParseError(i + 4, "chunk length runs past end of file")
        if chunk_type == b"MTrk":
            _parse_track(data, body, body + chunk_len, notes)
            tracks_seen += 1
        # unknown chunk types are skipped, per the SMF spec
        i = body + chunk_len

    notes.sort(key=_note_key)
    return Score(ticks_per_quarter=division, notes=notes)


# ---------------------------------------------------------------------------
# writing

def _varlen(value: int) -> bytes:
    out = bytearray([value & 0x7F])
    value >>= 7
    while value:
        out.insert(0, 0x80 | (value & 0x7F))
        value >>= 7
    return bytes(out)


def _assign_channels(notes: list[NoteEvent]) -> list[int]:
    """Spread same-pitch overlapping notes across channels.

    On a single channel, overlapping notes of one pitch cannot be paired
    back unambiguously, so each note goes to the lowest channel where its
    pitch is free for the note's whole span.  Channel 10 (percussion) is
    never used.  More than 15 simultaneous notes of one pitch exceed the
    available channels; the extra notes share the last channel and the
    round trip may re-pair them (warned, not an error).
    """
    usable = [c for c in range(16) if c != _PERCUSSION_CHANNEL]
    active: dict[int, list[tuple[int, int]]] = {c: [] for c in usable}  # ch -> [(end, pitch)]
    channels = []
    for note in notes:
        for ch in usable:
            active[ch] = [(end, p) for end, p in active[ch] if end > note.onset]
            if all(p != note.pitch for _, p in active[ch]):
                break
        else:
            ch = usable[-1]
            warnings.warn(
                f"more than {len(usable)} overlapping notes of pitch {note.pitch};"
                " note pairing may not round-trip")
        active[ch].append((note.onset + note.duration, note.pitch))
        channels.append(ch)
    return channels


def write_midi(score: Score) -> bytes:
    """Serialize a Score as a format-0 SMF byte string.

    One track, explicit note-off events, tempo fixed at 120 BPM and time
    signature 4/4.  ``parse_midi(write_midi(s))`` reproduces the note list
    of ``s`` exactly.
    """
    notes = sorted(score.notes, key=_note_key)
    channels = _assign_channels(notes)

    # (tick, order, message); note-offs sort before note-ons at equal ticks
    events: list[tuple[int, int, bytes]] = []
    for note, ch in zip(notes, channels):
        events.append((note.onset, 1, bytes([0x90 | ch, note.pitch, note.velocity])))
        events.append((note.onset + note.duration, 0, bytes([0x80 | ch, note.pitch, 0])))
    events.sort(key=lambda e: (e[0], e[1], e[2]))

    track = bytearray()
    track += b"\x00\xff\x58\x04\x04\x02\x18\x08"  # 4/4
    track += b"\x00\xff\x51\x03" + _TEMPO_120_BPM.to_bytes(3, "big")
    last_tick = 0
    for tick, _, message in events:
        track += _varlen(tick - last_tick) + message
        last_tick = tick
    track += b"\x00\xff\x2f\x00"

    header = b"MThd" + (6).to_bytes(4, "big") + b"\x00\x00\x00\x01"
    header += score.ticks_per_quarter.to_bytes(2, "big")
    return header + b"MTrk" + len(track).to_bytes(4, "big") + bytes(track)


# ---------------------------------------------------------------------------
# quantization

def _snap(ticks: int, numerator: int, denominator: int) -> int:
    # round-half-up of ticks * numerator / denominator, in exact integers
    return (2 * ticks * numerator + denominator) // (2 * denominator)


def quantize(score: Score, positions_per_bar: int = DEFAULT_POSITIONS_PER_BAR) -> QuantizedScore:
    """Snap a score onto a grid of Q positions per 4/4 bar.

    Onsets snap to the nearest grid position, ties rounding toward the
    later position.  Durations snap to the nearest positive number of grid
    units, clamped to at most two bars (2Q units).  Notes land in the bar
    of their snapped onset; an empty score yields a single empty bar.
    """
    q = positions_per_bar
    if q < 1:
        raise ValueError("positions_per_bar must be >= 1")
    bar_ticks = 4 * score.ticks_per_quarter

    placed = []  # (bar, QuantizedNote)
    for note in score.notes:
        grid_pos = _snap(note.onset, q, bar_ticks)
        units = min(max(_snap(note.duration, q, bar_ticks), 1), MAX_DURATION_BARS * q)
        placed.append((grid_pos // q, QuantizedNote(grid_pos % q, note.pitch, units, note.velocity)))

    n_bars = max((bar for bar, _ in placed), default=0) + 1
    bars: list[list[QuantizedNote]] = [[] for _ in range(n_bars)]
    for bar, qnote in placed:
        bars[bar].append(qnote)
    for bar_notes in bars:
        bar_notes.sort(key=lambda n: (n.position, n.pitch, n.duration, n.velocity))
    return QuantizedScore(positions_per_bar=q, bars=bars)


def to_score(qs: QuantizedScore, ticks_per_quarter: int | None = None) -> Score:
    """Lay a quantized score back onto a tick timeline.

    The default resolution is ``30 * Q`` ticks per quarter, which makes
    every grid step exactly 120 ticks regardless of Q, so that
    ``quantize(to_score(qs), Q)`` reproduces ``qs`` exactly.
    """
    q = qs.positions_per_bar
    tpq = 30 * q if ticks_per_quarter is None else ticks_per_quarter
    if (4 * tpq) % q:
        raise ValueError(f"ticks_per_quarter {tpq} does not place Q={q} on integer ticks")
    step = 4 * tpq // q
    notes = [
        NoteEvent(n.pitch, (bar * q + n.position) * step, n.duration * step, n.velocity)
        for bar, bar_notes in enumerate(qs.bars)
        for n in bar_notes
    ]
    notes.sort(key=_note_key)
    return Score(ticks_per_quarter=tpq, notes=notes)
