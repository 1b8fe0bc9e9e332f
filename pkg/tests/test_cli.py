import json

import pytest

from conftest import CORPUS
from fairsub.cli import main
from fairsub.parser import parse

TYPES = CORPUS / "types"


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.mark.parametrize("sub, sup, code", [
    ("ground_eager", "ground", 0),
    ("spacecraft", "spacecraft_old", 0),
    ("send_then_recv", "recv_then_choose", 1),
    ("loop_out", "loop_or_stop", 1),
])
def test_subtype_exit_codes(capsys, sub, sup, code):
    assert run(capsys, "subtype", TYPES / f"{sub}.st", TYPES / f"{sup}.st")[0] == code


def test_subtype_unknown_is_two(capsys):
    code, out, _ = run(capsys, "subtype", TYPES / "spacecraft.st", TYPES / "spacecraft_old.st", "--bound", 1)
    assert code == 2 and out.startswith("unknown")


def test_missing_file_is_usage_error(capsys, tmp_path):
    code, _, err = run(capsys, "subtype", tmp_path / "nope.st", TYPES / "ground.st")
    assert code == 64 and "nope.st" in err


def test_bad_flag_is_usage_error(capsys):
    assert run(capsys, "subtype", "--bound", "zero", "a", "b")[0] == 64
    assert run(capsys, "frobnicate")[0] == 64


def test_parse_error_has_position(capsys, tmp_path):
    bad = tmp_path / "bad.st"
    bad.write_text("+{ a: end,\n  b: ?? }\n")
    code, _, err = run(capsys, "subtype", bad, TYPES / "ground.st")
    assert code == 65
    assert f"{bad}:2:6:" in err


def test_subtype_json_and_dot(capsys, tmp_path):
    code, out, _ = run(capsys, "subtype", TYPES / "spacecraft.st", TYPES / "spacecraft_old.st",
                       "--json", "--dot-dir", tmp_path)
    assert code == 0
    data = json.loads(out)
    assert data["nodes"] == 11 and data["candidates"] == 1
    assert data["witnesses"][0]["context"] == "&{ tc: []1, done: []2 }"
    assert sorted(p.name for p in tmp_path.iterdir()) == ["simulation.dot", "witness0.dot"]


def test_controllable(capsys):
    code, out, _ = run(capsys, "controllable", TYPES / "ground.st")
    assert code == 0
    partner = out.split("partner:")[1].strip()
    assert parse(partner) == parse("rec t . +{ over: rec u . &{ tc: u, done: end } }")
    assert run(capsys, "controllable", TYPES / "uncontrollable.st")[0] == 1
    assert run(capsys, "controllable", TYPES / "end.st")[0] == 0


def test_partner(capsys):
    assert run(capsys, "partner", TYPES / "uncontrollable.st")[0] == 1
    code, out, _ = run(capsys, "partner", TYPES / "end.st")
    assert code == 0 and out.strip() == "end"


@pytest.mark.parametrize("left, right, code", [
    ("ground", "spacecraft", 0),
    ("stuck_branch", "stuck_branch_dual", 1),
    ("ground_eager", "spacecraft", 2),
])
def test_compliance_exit_codes(capsys, left, right, code):
    assert run(capsys, "compliance", TYPES / f"{left}.st", TYPES / f"{right}.st")[0] == code


def test_encode_qm(capsys, tmp_path):
    machine = CORPUS / "machines" / "loop.qm"
    code, out, _ = run(capsys, "encode-qm", "subtyping", machine)
    assert code == 0
    t, s = out.strip().splitlines()
    assert parse(s) == parse("&{ dollar: rec t . +{ dollar: &{ dollar: t }, E: &{ E: end } } }")
    run(capsys, "encode-qm", "subtyping", machine, "--out-dir", tmp_path)
    assert parse((tmp_path / "loop_sub.st").read_text()) == parse(t)
    assert run(capsys, "encode-qm", "refinement", machine)[0] == 64
    assert run(capsys, "encode-qm", "refinement", machine, "--target", "s", "--end-label", "dollar")[0] == 65


def test_render_type(capsys):
    code, out, _ = run(capsys, "render", TYPES / "spacecraft.st")
    assert code == 0 and 's0 -> s0 [label="!tm"]' in out


def test_render_witness(capsys):
    code, out, _ = run(capsys, "render", TYPES / "spacecraft.st", TYPES / "spacecraft_old.st", "--witness")
    assert code == 0
    assert out.count("subgraph cluster_") == 5 and out.count("style=dashed") == 2


def test_output_is_byte_stable(capsys):
    argv = ("render", TYPES / "spacecraft.st", TYPES / "spacecraft_old.st")
    assert run(capsys, *argv) == run(capsys, *argv)
    argv = ("corpus", CORPUS, "--json", "--no-timings")
    assert run(capsys, *argv) == run(capsys, *argv)


def test_corpus_command(capsys, tmp_path):
    code, out, _ = run(capsys, "corpus", CORPUS, "--no-timings")
    assert code == 0 and "error 0" in out
    assert run(capsys, "corpus", tmp_path)[0] == 0
    (tmp_path / "bad.pair").write_text("nonsense\n")
    assert run(capsys, "corpus", tmp_path)[0] == 1


def test_corpus_budget_failure(capsys, tmp_path):
    # the drain encoding grows its tree exponentially with the bound
    (tmp_path / "drain.pair").write_text(
        f"sub = {TYPES / 'qm_drain_sub.st'}\nsup = {TYPES / 'qm_drain_sup.st'}\n")
    code, out, _ = run(capsys, "corpus", tmp_path, "--timeout-ms", 50)
    assert code == 1 and "unknown" in out
