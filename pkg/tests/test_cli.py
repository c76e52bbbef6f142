import json
import subprocess
import sys

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cantorlab import cli
from cantorlab.errors import InvalidManifest, UnknownExperiment


def _run(tmp_path, *argv):
    code = cli.main([*argv, "--out", str(tmp_path)])
    return code


class TestManifest:
    @settings(max_examples=50)
    @given(st.sampled_from(sorted(cli.EXPERIMENTS)), st.one_of(st.none(), st.integers(0, 2**63)),
           st.dictionaries(st.sampled_from(["depth", "n", "samples"]), st.integers(0, 100), max_size=3))
    def test_round_trip(self, name, seed, params):
        m = cli.ExperimentManifest(name, params, seed, {"json": "x.json"})
        again = cli.ExperimentManifest.from_json(m.to_json())
        assert again == m

    def test_unknown_fields_are_rejected(self):
        with pytest.raises(InvalidManifest):
            cli.ExperimentManifest.from_json('{"experiment": "smb", "colour": "red"}')

    def test_boolean_seed_is_rejected(self):
        with pytest.raises(InvalidManifest):
            cli.ExperimentManifest.from_json('{"experiment": "smb", "seed": true}')

    def test_seed_is_required_for_stochastic_runs(self, tmp_path):
        for name in cli.STOCHASTIC:
            with pytest.raises(InvalidManifest):
                cli.run(cli.ExperimentManifest(name), tmp_path)

    def test_unknown_experiment(self, tmp_path):
        with pytest.raises(UnknownExperiment):
            cli.run(cli.ExperimentManifest("nope"), tmp_path)


class TestOutputs:
    def test_measure_eval_csv(self, tmp_path):
        assert _run(tmp_path, "-e", "measure-eval", "-p", "spec=uniform", "--depth", "3") == 0
        lines = (tmp_path / "measure-eval.csv").read_text().splitlines()
        assert lines[0].startswith("# cantorlab-output v1 experiment=measure-eval resolution=")
        assert lines[1] == "length,sigma,mass_lo,mass_hi"
        assert len(lines) == 2 + 15
        assert lines[-1] == "3,111,1/8,1/8"

    def test_spec_file_relative_to_manifest(self, tmp_path):
        (tmp_path / "b.json").write_text('{"type": "bernoulli", "p": "1/3"}')
        man = tmp_path / "run.json"
        man.write_text(json.dumps({"experiment": "measure-eval", "parameters": {"spec": "b.json", "depth": 1},
                                   "outputs": {"csv": "masses.csv"}}))
        assert cli.main(["--manifest", str(man), "--out", str(tmp_path / "o")]) == 0
        assert (tmp_path / "o" / "masses.csv").read_text().splitlines()[-1] == "1,1,2/3,2/3"

    def test_sampler_json_schema(self, tmp_path):
        assert _run(tmp_path, "-e", "sampler-mc", "--seed", "42", "--samples", "2000", "--set", "0,11") == 0
        doc = json.loads((tmp_path / "sampler-mc.json").read_text())
        assert doc["schema"] == "cantorlab-output/v1"
        assert doc["resolution"] == {"seed": 42, "depth": 4, "samples": 2000}
        assert abs(doc["estimate"] - 0.75) < 4 * doc["standard_error"] + 1e-12

    @pytest.mark.parametrize("name,params", [
        ("v-recursion", []),
        ("renewal-divergence", []),
        ("ergodicity", ["-p", "N=16"]),
        ("envelope", []),
        ("entropy-series", ["-p", "max_n=6"]),
        ("test-diagnostic", ["-p", "max_level=4", "-p", "cutoff=60"]),
    ])
    def test_fast_experiments_run(self, tmp_path, name, params):
        assert _run(tmp_path, "-e", name, *params) == 0
        files = list(tmp_path.iterdir())
        assert files
        for f in files:
            text = f.read_text()
            assert text.startswith("# cantorlab-output v1") or json.loads(text)["schema"] == "cantorlab-output/v1"

    def test_errors_are_json_on_stderr(self, tmp_path, capsys):
        assert _run(tmp_path, "-e", "sampler-mc") == 2
        err = json.loads(capsys.readouterr().err)
        assert err["error"] == "InvalidManifest"

    def test_bad_param_syntax(self, tmp_path, capsys):
        assert _run(tmp_path, "-e", "envelope", "-p", "oops") == 2

    def test_list(self, capsys):
        assert cli.main(["--list"]) == 0
        out = capsys.readouterr().out
        assert "smb  (seeded)" in out and "measure-eval" in out


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "cantorlab", "--list"], capture_output=True, text=True, check=True)
    assert "failing-fraction" in proc.stdout
