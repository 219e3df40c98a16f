from pathlib import Path

import pytest

from main import EXIT_FINDINGS, EXIT_OK, EXIT_PARSE, EXIT_USAGE, run
from tm_diff import structural_diff
from tm_format import HEADER, parse_tm

CORPUS = Path(__file__).parent / "corpus"
GOLDEN = str(CORPUS / "invoice_golden.tm")
EVENTS = str(CORPUS / "invoice.events")
INPUTS = ["--usecase", str(CORPUS / "invoice.usecase"), "--class", str(CORPUS / "invoice.class"), "--bind", str(CORPUS / "invoice.bind")]
ARTIFACTS = [
    "model.tm",
    "static.report",
    "events.report",
    "behavior.report",
    "trace.txt",
    "methods.txt",
    "static.dot",
    "events.dot",
    "behavior.dot",
]


@pytest.fixture(autouse=True)
def clean_environment(monkeypatch, tmp_path):
    for name in ("TMUML_SEED", "TMUML_MAX_STEPS", "TMUML_OUT_DIR", "NO_COLOR"):
        monkeypatch.delenv(name, raising=False)
    monkeypatch.chdir(tmp_path)


def test_transform_reproduces_the_golden_model(tmp_path, capsys):
    output = tmp_path / "invoice.tm"
    assert run(["transform", *INPUTS, "-o", str(output)]) == EXIT_OK
    assert structural_diff(parse_tm(Path(GOLDEN).read_text(encoding="utf-8")), parse_tm(output.read_text(encoding="utf-8"))) == []
    capsys.readouterr()
    assert run(["diff", GOLDEN, str(output)]) == EXIT_OK
    assert capsys.readouterr().out == ""


def test_transform_to_stdout_is_canonical_tm(capsys):
    assert run(["transform", "--usecase", str(CORPUS / "banking.usecase")]) == EXIT_OK
    out = capsys.readouterr().out
    assert out.startswith(HEADER + "\n")
    assert "machine BankingApplication role subject" in out


def test_validate(tmp_path, capsys):
    assert run(["validate", GOLDEN]) == EXIT_OK
    assert capsys.readouterr().out == ""
    bad = tmp_path / "bad.tm"
    bad.write_text("machine A { stage process }\nmachine B { stage process }\nflow A.process -> B.process\n", encoding="utf-8")
    assert run(["validate", str(bad)]) == EXIT_FINDINGS
    assert "error FLOW_ADJ flow A.process -> B.process" in capsys.readouterr().out


def test_parse_error_exit_code(tmp_path, capsys):
    broken = tmp_path / "broken.tm"
    broken.write_text("machine A {\n", encoding="utf-8")
    assert run(["validate", str(broken)]) == EXIT_PARSE
    assert f"{broken}:2:1:" in capsys.readouterr().err


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["validate"],
        ["validate", "missing.tm"],
        ["render", GOLDEN, "--view", "sequence"],
        ["parse", "notes.txt"],
        ["parse", EVENTS],
        ["simulate", GOLDEN, EVENTS, "--seed", "-1"],
        ["bogus"],
    ],
)
def test_usage_errors(argv):
    assert run(argv) == EXIT_USAGE


def test_help_exits_cleanly(capsys):
    assert run(["--help"]) == EXIT_OK
    assert "pipeline" in capsys.readouterr().out


def test_parse_echoes_canonical_text(capsys):
    assert run(["parse", GOLDEN]) == EXIT_OK
    assert capsys.readouterr().out.startswith(HEADER + "\n")
    assert run(["parse", EVENTS, "--tm", GOLDEN]) == EXIT_OK
    assert capsys.readouterr().out.startswith("# events model\n")
    assert run(["parse", str(CORPUS / "invoice.bind")]) == EXIT_OK
    assert "alias Invoice.id -> ID" in capsys.readouterr().out


def test_events_and_behavior_reports(capsys):
    assert run(["events", GOLDEN, EVENTS]) == EXIT_OK
    assert "warning UNCOVERED_ELEMENT System/Inputinvoiceid:" in capsys.readouterr().out
    assert run(["behavior", GOLDEN, EVENTS]) == EXIT_OK
    assert capsys.readouterr().out == ""
    assert run(["behavior", GOLDEN, EVENTS, "--start", "E1"]) == EXIT_OK
    assert "warning UNREACHABLE_EVENT E3:" in capsys.readouterr().out


def test_simulation_output_is_reproducible(capsys):
    assert run(["simulate", GOLDEN, EVENTS, "--seed", "7", "--steps", "50"]) == EXIT_OK
    first = capsys.readouterr().out
    assert run(["simulate", GOLDEN, EVENTS, "--seed", "7", "--steps", "50"]) == EXIT_OK
    second = capsys.readouterr().out
    assert first == second
    lines = first.splitlines()
    assert lines[0] == "# seed=7"
    assert lines[1] == "E"
    assert 2 <= len(lines) <= 52


def test_simulation_defaults_come_from_the_environment(monkeypatch, capsys):
    assert run(["simulate", GOLDEN, EVENTS, "--steps", "20"]) == EXIT_OK
    default = capsys.readouterr().out
    assert default.startswith("# seed=7\n")
    monkeypatch.setenv("TMUML_SEED", "7")
    assert run(["simulate", GOLDEN, EVENTS, "--steps", "20"]) == EXIT_OK
    assert capsys.readouterr().out == default


def test_invalid_environment_seed(monkeypatch):
    monkeypatch.setenv("TMUML_SEED", "seven")
    assert run(["simulate", GOLDEN, EVENTS]) == EXIT_USAGE


def test_recognize(tmp_path, capsys):
    trace = tmp_path / "run.trace"
    trace.write_text("# seed=0\nE10\nE11\nE13\n", encoding="utf-8")
    assert run(["recognize", GOLDEN, EVENTS, str(trace)]) == EXIT_OK
    assert capsys.readouterr().out == "Printinvoice 0\n"
    trace.write_text("E10\n", encoding="utf-8")
    assert run(["recognize", GOLDEN, EVENTS, str(trace)]) == EXIT_PARSE


def test_diff_reports_differences(tmp_path, capsys):
    smaller = tmp_path / "smaller.tm"
    smaller.write_text(Path(GOLDEN).read_text(encoding="utf-8").replace("method Printinvoice\n", ""), encoding="utf-8")
    assert run(["diff", GOLDEN, str(smaller)]) == EXIT_FINDINGS
    assert capsys.readouterr().out == "MissingMethod Printinvoice\n"


def test_render(tmp_path, capsys):
    assert run(["render", GOLDEN]) == EXIT_OK
    assert capsys.readouterr().out.startswith("digraph tm_static {")
    output = tmp_path / "behavior.dot"
    assert run(["render", GOLDEN, "--events", EVENTS, "--view", "behavior", "-o", str(output)]) == EXIT_OK
    assert output.read_text(encoding="utf-8").startswith("digraph tm_behavior {")
    assert run(["render", GOLDEN, "--view", "events"]) == EXIT_FINDINGS


def test_pipeline_writes_every_artifact(tmp_path, capsys):
    out = tmp_path / "run"
    assert run(["pipeline", *INPUTS, "--events", EVENTS, "--out", str(out)]) == EXIT_OK
    assert sorted(path.name for path in out.iterdir()) == sorted(ARTIFACTS)
    assert structural_diff(parse_tm(Path(GOLDEN).read_text(encoding="utf-8")), parse_tm((out / "model.tm").read_text(encoding="utf-8"))) == []
    assert (out / "static.report").read_text(encoding="utf-8") == ""
    assert (out / "trace.txt").read_text(encoding="utf-8").startswith("# seed=7\nE\n")
    assert "UNCOVERED_ELEMENT" in capsys.readouterr().out


def test_pipeline_is_byte_identical_across_runs(tmp_path):
    first, second = tmp_path / "first", tmp_path / "second"
    assert run(["--quiet", "pipeline", *INPUTS, "--events", EVENTS, "--out", str(first)]) == EXIT_OK
    assert run(["--quiet", "pipeline", *INPUTS, "--events", EVENTS, "--out", str(second)]) == EXIT_OK
    for name in ARTIFACTS:
        assert (first / name).read_bytes() == (second / name).read_bytes(), name


def test_pipeline_stops_at_the_first_failing_report(tmp_path, capsys):
    events = tmp_path / "empty_region.events"
    events.write_text("event E1 = { }\n", encoding="utf-8")
    out = tmp_path / "run"
    assert run(["pipeline", *INPUTS, "--events", str(events), "--out", str(out)]) == EXIT_FINDINGS
    assert "error REGION_EMPTY E1:" in (out / "events.report").read_text(encoding="utf-8")
    assert not (out / "trace.txt").exists()
    assert "Workflow stopped at events" in capsys.readouterr().err


def test_pipeline_out_dir_from_the_environment(monkeypatch, tmp_path):
    monkeypatch.setenv("TMUML_OUT_DIR", str(tmp_path / "from_env"))
    assert run(["--quiet", "pipeline", *INPUTS, "--events", EVENTS]) == EXIT_OK
    assert (tmp_path / "from_env" / "model.tm").is_file()


def test_pipeline_missing_input(tmp_path):
    assert run(["pipeline", *INPUTS, "--events", str(tmp_path / "none.events"), "--out", str(tmp_path)]) == EXIT_USAGE


def test_status_lines(monkeypatch, capsys):
    assert run(["validate", GOLDEN]) == EXIT_OK
    assert "✅" in capsys.readouterr().err
    monkeypatch.setenv("NO_COLOR", "1")
    assert run(["validate", GOLDEN]) == EXIT_OK
    err = capsys.readouterr().err
    assert "Static model" in err and "✅" not in err
    assert run(["--quiet", "validate", GOLDEN]) == EXIT_OK
    assert capsys.readouterr().err == ""


def test_undecodable_input_is_a_parse_error(tmp_path, capsys):
    broken = tmp_path / "broken.tm"
    broken.write_bytes(b"machine \xff\xfe { }\n")
    assert run(["parse", str(broken)]) == EXIT_PARSE
    assert f"{broken}:1:9: not valid UTF-8 (byte 0xff)" in capsys.readouterr().err
    usecase = tmp_path / "broken.usecase"
    usecase.write_bytes(b"subject S\nactor \xc3\n")
    assert run(["pipeline", "--usecase", str(usecase), *INPUTS[2:], "--events", EVENTS, "--out", str(tmp_path / "run")]) == EXIT_PARSE
    assert f"{usecase}:2:7:" in capsys.readouterr().err


def test_pipeline_output_path_is_a_file(tmp_path):
    taken = tmp_path / "taken"
    taken.write_text("", encoding="utf-8")
    assert run(["--quiet", "pipeline", *INPUTS, "--events", EVENTS, "--out", str(taken)]) == EXIT_USAGE
