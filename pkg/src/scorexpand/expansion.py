"""Splitting a piece at a boundary and filling the artificial gap.

``expand`` cuts a token sequence at a bar boundary, asks an infiller for
``gap_bars`` bars of new content, and splices the three parts back
together.  Any object with a ``generate(request, seed) -> token list``
method can act as an infiller; it must return a grammar-valid sequence
with exactly ``gap_bars`` bars, deterministically for a fixed
(request, seed).

Infillers shipped here:

- CopyPastInfiller / CopyFutureInfiller: repeat the adjacent context;
  null baselines that bracket "imitate one side" behaviour.
- RandomInfiller: uniform grammar-valid notes, a content-free floor.
- MarkovInfiller: order-k Markov chain over tokens with grammar masking
  and back-off to shorter contexts, the desk-scale generative stand-in.

All sampling draws nothing but ``random.Random.random()`` and picks
tokens by inverse CDF in a fixed vocabulary order, so outputs are
bit-reproducible across platforms and Python versions.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from pathlib import Path

from . import tokenizer
from .tokenizer import BAR, GrammarError, GrammarState, Token, TokenSequence, bar_count, slice_bars

# Cap on POS/PITCH/DUR/VEL tokens emitted into one generated bar; hitting
# it forces a BAR token so a model that never samples BAR still terminates.
MAX_NOTE_TOKENS_PER_BAR = 64

MODEL_FORMAT = "scorexpand-markov-model"
MODEL_VERSION = 1


class InfillError(RuntimeError):
    """An infiller failed or returned content violating its contract."""


class EmptyCorpus(ValueError):
    """No training material supplied."""


@dataclass(frozen=True)
class ExpansionRequest:
    """The two contexts around the gap and the gap width in bars."""

    past: tuple[Token, ...]
    future: tuple[Token, ...]
    gap_bars: int

    def __post_init__(self):
        object.__setattr__(self, "past", tuple(self.past))
        object.__setattr__(self, "future", tuple(self.future))
        if self.gap_bars < 1:
            raise ValueError("gap_bars must be a positive number of bars")
        if bar_count(self.past) < 1 or bar_count(self.future) < 1:
            raise ValueError("past and future contexts must each have at least one bar")


def split_at_boundary(ts: TokenSequence, boundary: int) -> tuple[list[Token], list[Token]]:
    """Split into (bars [0, boundary), bars [boundary, N)).

    Both sides must be non-empty: 1 <= boundary < bar_count(ts).
    """
    n = bar_count(ts)
    if not 1 <= boundary < n:
        raise tokenizer.RangeError(
            f"boundary {boundary} must leave non-empty sides of a {n}-bar sequence")
    return slice_bars(ts, 0, boundary), slice_bars(ts, boundary, n)


def expand(ts: TokenSequence, boundary: int, gap_bars: int, infiller, seed: int) -> list[Token]:
    """Insert ``gap_bars`` bars of generated content at ``boundary``.

    The result is past ++ new ++ future with the contexts token-exact;
    the infiller's contract (bar count, grammar) is enforced and a
    violation raises InfillError.
    """
    past, future = split_at_boundary(ts, boundary)
    request = ExpansionRequest(past=tuple(past), future=tuple(future), gap_bars=gap_bars)
    new = list(infiller.generate(request, seed))
    if bar_count(new) != gap_bars:
        raise InfillError(
            f"infiller returned {bar_count(new)} bars, requested {gap_bars}")
    try:
        tokenizer.validate(new, positions_per_bar=None)
    except GrammarError as exc:
        raise InfillError(f"infiller returned a malformed sequence: {exc}") from exc
    return past + new + future


# ---------------------------------------------------------------------------
# copy baselines

class CopyPastInfiller:
    """Fill the gap with the last ``gap_bars`` bars of the past context.

    When the past is shorter than the gap it is extended cyclically and
    the last ``gap_bars`` bars of that extension are used, so the bar
    touching the gap's right edge is always the past's final bar.
    """

    name = "copy-past"

    def generate(self, request: ExpansionRequest, seed: int) -> list[Token]:
        n = bar_count(request.past)
        out: list[Token] = []
        for j in range(request.gap_bars):
            src = (n - request.gap_bars + j) % n
            out += slice_bars(request.past, src, src + 1)
        return out


class CopyFutureInfiller:
    """Fill the gap with the first ``gap_bars`` bars of the future
    context, repeated cyclically if the future is shorter."""

    name = "copy-future"

    def generate(self, request: ExpansionRequest, seed: int) -> list[Token]:
        n = bar_count(request.future)
        out: list[Token] = []
        for j in range(request.gap_bars):
            src = j % n
            out += slice_bars(request.future, src, src + 1)
        return out


# ---------------------------------------------------------------------------
# seeded sampling helpers

def _uniform_index(rng: random.Random, n: int) -> int:
    return min(n - 1, int(rng.random() * n))


def _weighted_pick(rng: random.Random, candidates: list[tuple[Token, int]]) -> Token:
    """Inverse-CDF pick; ``candidates`` must be in fixed vocabulary order."""
    total = sum(w for _, w in candidates)
    target = rng.random() * total
    acc = 0.0
    for token, weight in candidates:
        acc += weight
        if target < acc:
            return token
    return candidates[-1][0]


class RandomInfiller:
    """Uniform random grammar-valid bars; ignores both contexts."""

    name = "random"

    def __init__(self, positions_per_bar: int = tokenizer.DEFAULT_POSITIONS_PER_BAR,
                 max_notes_per_bar: int = 8):
        self.q = positions_per_bar
        self.max_notes_per_bar = max_notes_per_bar

    def generate(self, request: ExpansionRequest, seed: int) -> list[Token]:
        rng = random.Random(seed)
        out: list[Token] = []
        for _ in range(request.gap_bars):
            out.append(BAR)
            notes = []
            for _ in range(1 + _uniform_index(rng, self.max_notes_per_bar)):
                pos = _uniform_index(rng, self.q)
                pit = tokenizer.PITCH_MIN + _uniform_index(
                    rng, tokenizer.PITCH_MAX - tokenizer.PITCH_MIN + 1)
                dur = 1 + _uniform_index(rng, 2 * self.q)
                vel = _uniform_index(rng, tokenizer.VELOCITY_BINS)
                notes.append((pos, pit, dur, vel))
            for pos, pit, dur, vel in sorted(notes):
                out += [tokenizer.position(pos), tokenizer.pitch(pit),
                        tokenizer.duration(dur), tokenizer.velocity(vel)]
        return out


# ---------------------------------------------------------------------------
# Markov chain

@dataclass
class MarkovModel:
    """Token transition counts for every context length 0..order.

    ``table`` maps a context tuple (shorter tuples are the back-off
    contexts, ``()`` the unigram) to ``{next token: count}``.
    """

    order: int
    table: dict[tuple[Token, ...], dict[Token, int]] = field(default_factory=dict)

    def vocabulary(self) -> list[Token]:
        """All tokens the model has seen, in the fixed sampling order."""
        seen = set()
        for ctx, nexts in self.table.items():
            seen.update(ctx)
            seen.update(nexts)
        return sorted(seen)


def train_markov(corpus: list[TokenSequence], order: int = 2) -> MarkovModel:
    """Count every (context, next token) pair across the corpus.

    Contexts of every length up to ``order`` are recorded so sampling can
    back off; the model is immutable after training.
    """
    if order < 1:
        raise ValueError("order must be >= 1")
    if not corpus or all(len(seq) == 0 for seq in corpus):
        raise EmptyCorpus("cannot train a Markov model on an empty corpus")
    table: dict[tuple[Token, ...], dict[Token, int]] = {}
    for seq in corpus:
        seq = list(seq)
        for i, token in enumerate(seq):
            for length in range(min(order, i) + 1):
                ctx = tuple(seq[i - length:i])
                nexts = table.setdefault(ctx, {})
                nexts[token] = nexts.get(token, 0) + 1
    return MarkovModel(order=order, table=table)


class MarkovInfiller:
    """Autoregressive sampler over a trained MarkovModel.

    The context window starts as the last ``order`` tokens of the past
    and slides over the generated output.  At each step the candidate
    distribution is masked down to grammar-legal tokens (within a bar,
    positions may not decrease); if the masked distribution at the current
    context length is empty or the context is unseen, sampling backs off
    to shorter contexts, ending at the unigram.  Generation stops when the
    (gap_bars+1)-th BAR token would be emitted; that token is dropped.
    """

    name = "markov"

    def __init__(self, model: MarkovModel):
        self.model = model
        self._vocab = model.vocabulary()

    def _pick(self, rng: random.Random, window: list[Token], state: GrammarState) -> Token:
        for length in range(min(self.model.order, len(window)), -1, -1):
            ctx = tuple(window[len(window) - length:])
            nexts = self.model.table.get(ctx)
            if not nexts:
                continue
            legal = [(t, nexts[t]) for t in sorted(nexts) if state.is_legal(t)]
            if legal:
                return _weighted_pick(rng, legal)
        raise InfillError(
            "no grammar-legal continuation at any context length"
            f" (expected {state.describe_expected()})")

    def generate(self, request: ExpansionRequest, seed: int) -> list[Token]:
        rng = random.Random(seed)
        window = list(request.past)
        state = GrammarState(positions_per_bar=None)
        out: list[Token] = []
        bars_emitted = 0
        note_tokens_in_bar = 0
        while True:
            if (state.at_bar_boundary and bars_emitted > 0
                    and note_tokens_in_bar >= MAX_NOTE_TOKENS_PER_BAR):
                token = BAR
            else:
                token = self._pick(rng, window, state)
            if token.kind == "BAR":
                if bars_emitted == request.gap_bars:
                    return out
                bars_emitted += 1
                note_tokens_in_bar = 0
            else:
                note_tokens_in_bar += 1
            out.append(token)
            window.append(token)
            state.advance(token)


# ---------------------------------------------------------------------------
# model persistence

def save_markov_model(model: MarkovModel, path: str | Path) -> None:
    """Write the model as versioned JSON: order, vocabulary, count table."""
    vocab = model.vocabulary()
    index = {token: i for i, token in enumerate(vocab)}
    counts = []
    for ctx in sorted(model.table):
        nexts = model.table[ctx]
        row = [[index[t], nexts[t]] for t in sorted(nexts)]
        counts.append([[index[t] for t in ctx], row])
    doc = {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "order": model.order,
        "vocab": [str(t) for t in vocab],
        "counts": counts,
    }
    Path(path).write_text(json.dumps(doc, indent=1) + "\n")


def load_markov_model(path: str | Path) -> MarkovModel:
    doc = json.loads(Path(path).read_text())
    if doc.get("format") != MODEL_FORMAT:
        raise ValueError(f"{path}: not a {MODEL_FORMAT} file")
    if doc.get("version") != MODEL_VERSION:
        raise ValueError(f"{path}: unsupported model version {doc.get('version')}")
    vocab = [tokenizer.from_text(text)[0] for text in doc["vocab"]]
    table: dict[tuple[Token, ...], dict[Token, int]] = {}
    for ctx_indices, row in doc["counts"]:
        ctx = tuple(vocab[i] for i in ctx_indices)
        table[ctx] = {vocab[i]: count for i, count in row}
    return MarkovModel(order=doc["order"], table=table)
