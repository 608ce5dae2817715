import json

from textfeat.cli import main


def test_mock_run_end_to_end(hand_reviews, tmp_path, capsys):
    out = tmp_path / "features.csv"
    code = main(["--reviews", str(hand_reviews), "--out", str(out), "--mock", "--mock-dim", "4"])
    assert code == 0
    lines = out.read_text().strip().splitlines()
    assert lines[0].startswith("paper_id,discourse:")
    assert len(lines) == 3  # header + two papers
    caps = json.loads((tmp_path / "features.csv.capabilities.json").read_text())
    assert caps["discourse"] is True
    assert caps["embedding_dim"] == 4


def test_reruns_are_byte_identical(hand_reviews, tmp_path):
    out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
    for out in (out1, out2):
        assert main(["--reviews", str(hand_reviews), "--out", str(out), "--mock"]) == 0
    assert out1.read_bytes() == out2.read_bytes()


def test_missing_reviews_file_exit_2(tmp_path, capsys):
    code = main(["--reviews", str(tmp_path / "nope.jsonl"), "--out", str(tmp_path / "o.csv"), "--mock"])
    assert code == 2


def test_unavailable_backend_exit_3(hand_reviews, tmp_path, capsys):
    code = main(["--reviews", str(hand_reviews), "--out", str(tmp_path / "o.csv"),
                 "--model", str(tmp_path / "missing-model")])
    assert code == 3
    assert "--mock" in capsys.readouterr().err


def test_no_discourse_model_emits_without_discourse(hand_reviews, tmp_path, capsys):
    out = tmp_path / "nodisc.csv"
    code = main(["--reviews", str(hand_reviews), "--out", str(out), "--mock-dim", "4"])
    assert code == 0
    header = out.read_text().splitlines()[0]
    assert "discourse:" not in header
    note = capsys.readouterr().err
    assert "without discourse columns" in note
