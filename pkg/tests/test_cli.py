import json
from pathlib import Path

import pytest

from copland.cli import main
from copland.core import Asp, At, LSeq, Sig
from copland.text import decode

DATA = Path(__file__).parent / "data"
ROOT = Path(__file__).parent.parent
VC = str(ROOT / "data" / "vc.copland")
LAYERED = str(ROOT / "data" / "layered.copland")


def test_parse_prints_at_lseq_tree(capsys):
    assert main(["parse", VC]) == 0
    assert decode(capsys.readouterr().out) == At(1, LSeq(Asp(0, (), 1, 7), Sig()))
    assert main(["parse", VC, "--format", "tree"]) == 0
    assert capsys.readouterr().out.splitlines()[:2] == ["At place=1", "  LSeq"]


def test_parse_text_round_trip(capsys):
    assert main(["parse", LAYERED, "--format", "text"]) == 0
    text = capsys.readouterr().out.strip()
    assert main(["parse", "-e", text]) == 0
    canon = capsys.readouterr().out
    assert main(["parse", LAYERED]) == 0
    assert capsys.readouterr().out == canon


def test_parse_error_exit_1(capsys):
    assert main(["parse", "-e", "SIG ->"]) == 1
    assert "1:7: expected term" in capsys.readouterr().err


def test_usage_error_exit_2():
    with pytest.raises(SystemExit) as info:
        main(["parse"])
    assert info.value.code == 2
    with pytest.raises(SystemExit) as info:
        main(["frobnicate"])
    assert info.value.code == 2


def test_annotate_and_events(capsys, tmp_path):
    out = tmp_path / "anno.json"
    assert main(["annotate", "-e", "SIG ~<+,->~ HSH", "--out", str(out)]) == 0
    at = decode(out.read_bytes(), "anno")
    assert at.rng == (0, 4)
    assert main(["events", "-e", "SIG ~<+,->~ HSH"]) == 0
    text = capsys.readouterr().out
    assert "earlier pairs: 5" in text
    assert "  1 < 3" in text and "  1 < 2" not in text


def test_run_then_appraise(tmp_path, capsys):
    run, golden = tmp_path / "run.json", tmp_path / "golden.json"
    assert main(["run", LAYERED, "--nonce", "--seed", "4", "--out", str(run), "--golden-out", str(golden)]) == 0
    assert main(["appraise", LAYERED, str(run), "--golden", str(golden)]) == 0
    assert "verdict: PASS" in capsys.readouterr().out

    doc = json.loads(run.read_text())
    doc["evidence"]["bits"] = "00" + doc["evidence"]["bits"][2:]
    tampered = tmp_path / "bad.json"
    tampered.write_text(json.dumps(doc))
    report = tmp_path / "report.json"
    assert main(["appraise", LAYERED, str(tampered), "--golden", str(golden), "--out", str(report)]) == 1
    result = decode(report.read_bytes(), "appraisal")
    assert [(f.path, f.check) for f in result.failures()] == [("$", "signature")]


def test_appraise_rejects_other_phrase(tmp_path, capsys):
    run = tmp_path / "run.json"
    assert main(["run", VC, "--out", str(run)]) == 0
    assert main(["appraise", LAYERED, str(run)]) == 1
    assert "different phrase" in capsys.readouterr().err


def test_run_unknown_place_exit_1(capsys):
    assert main(["run", "-e", "@9[SIG]"]) == 1
    assert "UnknownPlace" in capsys.readouterr().err


def test_run_with_initial_evidence(tmp_path, capsys):
    ev = tmp_path / "ev.json"
    ev.write_text('{"k":"N","nonce_id":0,"bits":"abcd","sub":{"k":"MT"}}')
    assert main(["run", "-e", "CPY", "--evidence", str(ev)]) == 0
    record = decode(capsys.readouterr().out, "run")
    assert record.evidence.bits == b"\xab\xcd"


def test_check_small(capsys, tmp_path):
    out = tmp_path / "suite.json"
    assert main(["check", "--count", "40", "--depth", "3", "--seed", "7", "--out", str(out)]) == 0
    assert "failures: 0" in capsys.readouterr().out
    assert decode(out.read_bytes(), "suite").failures == ()


def test_config_file(tmp_path, capsys):
    from copland.config import default_config, save

    cfg = tmp_path / "cfg.json"
    save(default_config(4, "real"), cfg)
    assert main(["demo", "--config", str(cfg), "--seed", "3"]) == 0
    assert capsys.readouterr().out == (DATA / "demo_real_seed3.txt").read_text()


@pytest.mark.parametrize("args, golden", [([], "demo_seed0.txt"), (["--seed", "3", "--provider", "real"], "demo_real_seed3.txt")])
def test_demo_is_byte_stable(capsys, args, golden):
    assert main(["demo", *args]) == 0
    assert capsys.readouterr().out == (DATA / golden).read_text()


def test_check_full_example(capsys):
    assert main(["check", "--count", "1000", "--depth", "4", "--seed", "7"]) == 0
    assert "failures: 0" in capsys.readouterr().out
