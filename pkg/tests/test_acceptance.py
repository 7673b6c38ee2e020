"""Acceptance suite: one test per release criterion.

Run with ``pytest tests/test_acceptance.py -v -s`` to see one pass/fail
line per criterion.  Tolerances are part of the contract; do not loosen
them here.
"""

import functools
import json
import math
import random

import numpy as np
import pytest

from scorexpand import cli
from scorexpand.expansion import (CopyFutureInfiller, CopyPastInfiller, ExpansionRequest,
                                  MarkovInfiller, expand, train_markov)
from scorexpand.harness import load_annotations
from scorexpand.metrics import boundary_analysis, gs_pair, grooving_vector, rhs
from scorexpand.midi_io import parse_midi, quantize, to_score, write_midi
from scorexpand.tokenizer import (BAR, bar_count, decode, duration, encode, pitch, position,
                                  slice_bars, velocity, velocity_bin)

from .conftest import random_quantized, random_score

Q = 16


def criterion(name):
    def decorate(fn):
        @functools.wraps(fn)
        def wrapper(*args, **kwargs):
            try:
                fn(*args, **kwargs)
            except BaseException:
                print(f"[ACCEPTANCE] {name}: FAIL")
                raise
            print(f"[ACCEPTANCE] {name}: PASS")
        return wrapper
    return decorate


def _onset_bar(positions):
    vec = np.zeros(Q, dtype=np.int8)
    for p in positions:
        vec[p] = 1
    return vec


def _random_hist(rng):
    raw = [rng.random() + 1e-3 for _ in range(7)]
    total = sum(raw)
    return np.array([x / total for x in raw])


def _fixture_sequences(fixtures_dir):
    annotations = load_annotations(fixtures_dir / "annotations.json")
    pieces = []
    for name, boundary in sorted(annotations.items()):
        score = parse_midi((fixtures_dir / name).read_bytes())
        pieces.append((name, boundary, encode(quantize(score, Q))))
    return pieces


@criterion("metric exactness")
def test_metric_exactness():
    uniform = np.full(7, 1 / 7)
    assert abs(rhs(uniform, uniform) - (-math.log2(7))) <= 1e-9
    one_hot = np.zeros(7)
    one_hot[3] = 1.0
    assert abs(rhs(one_hot, uniform) - (-math.log2(7))) <= 1e-9
    a = _onset_bar([0, 8])
    assert gs_pair(a, a) == 1.0
    assert gs_pair(a, 1 - a) == 0.0
    assert gs_pair(a, _onset_bar([0, 4])) == 0.875


@criterion("oracle equivalence")
def test_oracle_equivalence():
    rng = random.Random(0xACCE1)
    for _ in range(1000):
        h1, h2 = _random_hist(rng), _random_hist(rng)
        oracle = sum(p * math.log2(q) for p, q in zip(h1, h2))
        assert abs(rhs(h1, h2) - oracle) <= 1e-12
    for _ in range(1000):
        a = np.array([rng.randrange(2) for _ in range(Q)], dtype=np.int8)
        b = np.array([rng.randrange(2) for _ in range(Q)], dtype=np.int8)
        oracle = 1 - sum(1 for x, y in zip(a, b) if x != y) / Q
        assert abs(gs_pair(a, b) - oracle) <= 1e-12


@criterion("Gibbs property")
def test_gibbs_property():
    rng = random.Random(0xACCE2)
    for _ in range(200):
        h1 = _random_hist(rng)
        ceiling = rhs(h1, h1)
        assert abs(rhs(h1, h1.copy()) - ceiling) == 0.0  # equality at h2 == h1
        for _ in range(200):
            h2 = _random_hist(rng)
            if np.array_equal(h1, h2):
                continue
            assert rhs(h1, h2) < ceiling


@criterion("codec round trips")
def test_codec_round_trips():
    rng = random.Random(0xACCE3)
    for _ in range(500):
        score = random_score(rng, rng.randrange(1, 60))
        assert parse_midi(write_midi(score)).notes == score.notes
    for _ in range(500):
        qs = random_quantized(rng, n_bars=rng.randrange(1, 8))
        tokens = encode(qs)
        out = decode(tokens)
        assert encode(out) == tokens
        assert len(out.bars) == len(qs.bars)
        for got, want in zip(out.bars, qs.bars):
            assert [(n.position, n.pitch, n.duration) for n in got] == \
                   [(n.position, n.pitch, n.duration) for n in want]
            assert all(velocity_bin(g.velocity) == velocity_bin(w.velocity)
                       and abs(g.velocity - w.velocity) < 15.75
                       for g, w in zip(got, want))


@criterion("20-piece expansion contract (12 -> 16 bars)")
def test_twenty_piece_expansion(fixtures_dir):
    pieces = _fixture_sequences(fixtures_dir)
    assert len(pieces) >= 20
    infiller = MarkovInfiller(train_markov([ts for _, _, ts in pieces], order=2))
    for name, boundary, ts in pieces:
        assert bar_count(ts) == 12, name
        expanded = expand(ts, boundary, 4, infiller, seed=11)
        assert bar_count(expanded) == 16, name
        # full MIDI round trip must preserve both contexts token-exactly
        reparsed = encode(quantize(parse_midi(write_midi(to_score(decode(expanded, Q)))), Q))
        assert slice_bars(reparsed, 0, boundary) == slice_bars(ts, 0, boundary), name
        assert slice_bars(reparsed, boundary + 4, 16) == slice_bars(ts, boundary, 12), name


@criterion("copy-infiller sign properties on disjoint fixtures")
def test_sign_properties(fixtures_dir):
    pieces = _fixture_sequences(fixtures_dir)
    assert len(pieces) >= 20
    for name, boundary, ts in pieces:
        n = bar_count(ts)
        for infiller, want_positive in ((CopyFutureInfiller(), True),
                                        (CopyPastInfiller(), False)):
            expanded = expand(ts, boundary, 4, infiller, seed=0)
            past = slice_bars(expanded, 0, boundary)
            new = slice_bars(expanded, boundary, boundary + 4)
            future = slice_bars(expanded, boundary + 4, n + 4)
            analysis = boundary_analysis(past, new, future, Q)
            if want_positive:
                assert analysis.delta_gs > 0, name
                assert analysis.delta_rhs > 0, name  # registers disjoint by design
            else:
                assert analysis.delta_gs < 0, name
                assert analysis.delta_rhs < 0, name


@criterion("batch determinism (byte-identical outputs)")
def test_batch_determinism(fixtures_dir, tmp_path):
    outputs = []
    for run_dir in ("first", "second"):
        out_dir = tmp_path / run_dir
        code = cli.main(["run", "--config", str(fixtures_dir / "experiment.json"),
                         "--infiller", "markov", "--out-dir", str(out_dir)])
        assert code == cli.EXIT_OK
        outputs.append({p.name: p.read_bytes() for p in sorted(out_dir.iterdir())})
    first, second = outputs
    assert set(first) == set(second)
    assert {"results.csv", "results.json", "summary.json"} <= set(first)
    assert sum(name.endswith(".mid") for name in first) == 20
    for name in first:
        assert first[name] == second[name], name


@criterion("Markov on a degenerate corpus reproduces the bar")
def test_markov_degenerate_corpus():
    pattern = [BAR, position(0), pitch(60), duration(4), velocity(5),
               position(8), pitch(64), duration(2), velocity(3)]
    model = train_markov([pattern * 8], order=2)
    # the transition table is fully deterministic at order 2
    for ctx, nexts in model.table.items():
        if len(ctx) == 2:
            assert len(nexts) == 1, (ctx, nexts)
    infiller = MarkovInfiller(model)
    request = ExpansionRequest(past=tuple(pattern * 2), future=tuple(pattern), gap_bars=1)
    for seed in (0, 1, 2, 3, 99, 12345, 2 ** 40):
        assert infiller.generate(request, seed) == pattern


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v", "-s"]))
