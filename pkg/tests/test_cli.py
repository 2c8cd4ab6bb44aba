import json
import subprocess
import sys

import pytest

from localrep.cli import JobSpec, main, run
from localrep.errors import ParseError
from localrep.jsonio import (
    representation_from_json,
    representation_to_json,
    round_floats,
)


def write(tmp_path, name, payload):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


TRIANGULAR = {
    "field": {"type": "padic", "p": 5},
    "n": 2,
    "generators": {"a": [["1", "1"], ["0", "1"]]},
}

REAL_DIAG = {
    "field": {"type": "real"},
    "n": 2,
    "generators": {"a": [["2.0", "0.0"], ["0.0", "0.5"]]},
}


class TestRoundTrip:
    @pytest.mark.parametrize("payload", [
        TRIANGULAR,
        REAL_DIAG,
        {"field": {"type": "funcfield", "p": 3}, "n": 2,
         "generators": {"a": [["T", "1"], ["0", "1/T"]]}},
    ])
    def test_emitted_representation_reparses_equal(self, payload):
        rho = representation_from_json(payload)
        assert representation_from_json(representation_to_json(rho)) == rho

    def test_round_floats(self):
        assert round_floats(1.23456789012345678) == 1.23456789012
        assert round_floats({"x": [1.0 / 3.0]}) == {"x": [0.333333333333]}


class TestRun:
    def test_analyze_triangular(self, tmp_path):
        job = JobSpec(command="analyze", input=write(tmp_path, "r.json", TRIANGULAR))
        code, payload = run(job)
        assert code == 0
        assert payload["nonparabolic"] is False
        assert payload["cr"] is False
        assert payload["ss"]["generators"]["a"] == [["1", "0"], ["0", "1"]]

    def test_semisimplify(self, tmp_path):
        job = JobSpec(command="semisimplify",
                      input=write(tmp_path, "r.json", TRIANGULAR))
        code, payload = run(job)
        assert code == 0
        assert payload["block_sizes"] == [1, 1]

    def test_counterexample(self):
        job = JobSpec(command="counterexample", p=5, t="1/5", imax=12)
        code, payload = run(job)
        assert code == 0
        assert payload["verdict"] is True
        assert payload["valuation_sequence"][:3] == [-1, 1, 3]

    def test_separate_conjugate_pair(self, tmp_path):
        base = {"field": {"type": "padic", "p": 5}, "n": 2,
                "generators": {"a": [["2", "0"], ["0", "3"]]}}
        conj = {"field": {"type": "padic", "p": 5}, "n": 2,
                "generators": {"a": [["2", "1"], ["0", "3"]]}}
        path = write(tmp_path, "fam.json", {"family": [base, conj]})
        code, payload = run(JobSpec(command="separate", input=path))
        assert code == 0
        assert payload["matrix"] == [[True, True], [True, True]]

    def test_minimize_real(self, tmp_path):
        job = JobSpec(command="minimize", input=write(tmp_path, "r.json", REAL_DIAG))
        code, payload = run(job)
        assert code == 0
        assert payload["status"] == "ATTAINED"

    def test_degenerate(self, tmp_path):
        minus = {"field": {"type": "padic", "p": 5}, "n": 2,
                 "generators": {"a": [["2", "0"], ["1", "3"]]}}
        plus = {"field": {"type": "padic", "p": 5}, "n": 2,
                "generators": {"a": [["2", "1"], ["0", "3"]]}}
        job = JobSpec(command="degenerate",
                      input=write(tmp_path, "m.json", minus),
                      input2=write(tmp_path, "p.json", plus),
                      imax=6)
        code, payload = run(job)
        assert code == 0
        assert payload["verdict"] is True and payload["blocks"] == [1, 1]

    def test_tree(self, tmp_path):
        treerep = {"field": {"type": "padic", "p": 5}, "n": 2,
                   "generators": {"a": [["1/5", "0"], ["0", "5"]]}}
        job = JobSpec(command="tree", input=write(tmp_path, "t.json", treerep),
                      radius=3)
        code, payload = run(job)
        assert code == 0
        assert payload["generators"]["a"]["translation_length"] == 2

    def test_option_ranges(self):
        with pytest.raises(ParseError):
            JobSpec(command="analyze", imax=0)
        with pytest.raises(ParseError):
            JobSpec(command="tree", radius=9)


class TestMainExitCodes:
    def test_parse_error_is_2(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text("{ nope")
        assert main(["analyze", "--input", str(bad)]) == 2
        err = capsys.readouterr().err
        assert "line" in err and "column" in err

    def test_precondition_is_3(self, tmp_path, capsys):
        path = write(tmp_path, "r.json", TRIANGULAR)
        assert main(["minimize", "--input", path]) == 3
        assert "NOT_REAL_FIELD" in capsys.readouterr().err

    def test_success_is_0(self, tmp_path, capsys):
        path = write(tmp_path, "r.json", TRIANGULAR)
        assert main(["analyze", "--input", path]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["schema"] == 1

    def test_byte_identical_reports(self, tmp_path, capsys):
        path = write(tmp_path, "r.json", REAL_DIAG)
        assert main(["minimize", "--input", path, "--seed", "0x5EED"]) == 0
        first = capsys.readouterr().out
        assert main(["minimize", "--input", path, "--seed", "0x5EED"]) == 0
        second = capsys.readouterr().out
        assert first == second and first

    def test_console_entry_point(self, tmp_path):
        path = write(tmp_path, "r.json", TRIANGULAR)
        proc = subprocess.run(
            [sys.executable, "-m", "localrep.cli", "analyze", "--input", path],
            capture_output=True, text=True)
        assert proc.returncode == 0
        assert json.loads(proc.stdout)["cr"] is False
