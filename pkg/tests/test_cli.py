import json

import pytest

from scorexpand import cli
from scorexpand.midi_io import parse_midi, quantize
from scorexpand.tokenizer import bar_count, encode


def run_cli(argv):
    try:
        return cli.main(argv)
    except SystemExit as exc:  # argparse usage failures
        return exc.code


def test_no_arguments_is_usage_error(capsys):
    assert run_cli([]) == cli.EXIT_USAGE
    capsys.readouterr()


def test_unknown_subcommand_is_usage_error(capsys):
    assert run_cli(["wibble"]) == cli.EXIT_USAGE
    capsys.readouterr()


def test_expand_single_file(fixtures_dir, tmp_path, capsys):
    out = tmp_path / "expanded.mid"
    code = run_cli(["expand", str(fixtures_dir / "piece_01.mid"),
                    "--boundary", "8", "--gap", "4", "--infiller", "copy-future",
                    "--seed", "3", "--out", str(out)])
    assert code == cli.EXIT_OK
    assert "12 bars -> 16 bars" in capsys.readouterr().out
    ts = encode(quantize(parse_midi(out.read_bytes()), 16))
    assert bar_count(ts) == 16


def test_expand_missing_file_is_data_error(tmp_path, capsys):
    code = run_cli(["expand", str(tmp_path / "nope.mid"),
                    "--boundary", "8", "--out", str(tmp_path / "o.mid")])
    assert code == cli.EXIT_DATA
    assert "scorexpand:" in capsys.readouterr().err


def test_expand_markov_without_model_is_data_error(fixtures_dir, tmp_path, capsys):
    code = run_cli(["expand", str(fixtures_dir / "piece_01.mid"), "--boundary", "8",
                    "--infiller", "markov", "--out", str(tmp_path / "o.mid")])
    assert code == cli.EXIT_DATA
    capsys.readouterr()


def test_evaluate_triple(fixtures_dir, capsys):
    code = run_cli(["evaluate", str(fixtures_dir / "piece_01.mid"),
                    str(fixtures_dir / "piece_02.mid"), str(fixtures_dir / "piece_03.mid")])
    assert code == cli.EXIT_OK
    report = json.loads(capsys.readouterr().out)
    assert set(report) == {"gs1", "gs2", "delta_gs", "rhs1", "rhs2", "delta_rhs"}
    assert report["rhs1"] <= 0 and report["rhs2"] <= 0


def test_train_markov_then_expand(fixtures_dir, tmp_path, capsys):
    model = tmp_path / "model.json"
    assert run_cli(["train-markov", "--corpus", str(fixtures_dir),
                    "--order", "2", "--out", str(model)]) == cli.EXIT_OK
    assert "trained order-2 model on 20 pieces" in capsys.readouterr().out
    out = tmp_path / "expanded.mid"
    code = run_cli(["expand", str(fixtures_dir / "piece_01.mid"), "--boundary", "8",
                    "--infiller", "markov", "--markov-model", str(model),
                    "--seed", "4", "--out", str(out)])
    assert code == cli.EXIT_OK
    capsys.readouterr()
    assert bar_count(encode(quantize(parse_midi(out.read_bytes()), 16))) == 16


def test_run_fixture_experiment(fixtures_dir, tmp_path, capsys):
    out_dir = tmp_path / "out"
    code = run_cli(["run", "--config", str(fixtures_dir / "experiment.json"),
                    "--out-dir", str(out_dir)])
    assert code == cli.EXIT_OK
    assert "20/20 pieces expanded" in capsys.readouterr().out
    assert (out_dir / "results.csv").is_file()
    assert (out_dir / "results.json").is_file()
    assert (out_dir / "summary.json").is_file()
    assert len(list(out_dir.glob("*.mid"))) == 20


def test_run_partial_failure_exit_code(fixtures_dir, tmp_path, capsys):
    corpus = tmp_path / "corpus"
    corpus.mkdir()
    for i in (1, 2):
        name = f"piece_{i:02d}.mid"
        (corpus / name).write_bytes((fixtures_dir / name).read_bytes())
    (corpus / "broken.mid").write_bytes(b"junk")
    (tmp_path / "ann.json").write_text(json.dumps([
        {"file": "piece_01.mid", "boundary_bar": 8},
        {"file": "piece_02.mid", "boundary_bar": 8},
        {"file": "broken.mid", "boundary_bar": 8},
    ]))
    (tmp_path / "cfg.json").write_text(json.dumps({
        "corpus_dir": "corpus", "annotations": "ann.json", "output_dir": "out"}))
    code = run_cli(["run", "--config", str(tmp_path / "cfg.json")])
    captured = capsys.readouterr()
    assert code == cli.EXIT_PARTIAL
    assert "broken.mid" in captured.err
    assert "2/3 pieces expanded" in captured.out


def test_run_missing_config_is_data_error(tmp_path, capsys):
    assert run_cli(["run", "--config", str(tmp_path / "nope.json")]) == cli.EXIT_DATA
    capsys.readouterr()
