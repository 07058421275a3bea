import json
import subprocess
import sys

import pytest

from beer.cli import main
from beer.code import canonicalize, code_from_dict, hamming_7_4, sample_random_code
from beer.profile import MiscorrectionProfile, load_profile, write_dump
from beer.solver import SolveOutcome


def run(*argv):
    return main([str(a) for a in argv])


def read(path):
    return json.loads(path.read_text())


@pytest.fixture
def example_profile(tmp_path):
    path = tmp_path / "example.json"
    prof = MiscorrectionProfile.from_mapping(4, {(0,): {1, 2, 3}, (1,): (), (2,): (), (3,): ()})
    path.write_text(json.dumps(prof.to_dict()))
    return path


def test_gen_code(tmp_path):
    out = tmp_path / "code.json"
    assert run("gen-code", "--k", 4, "--seed", 7, "-o", out) == 0
    code = code_from_dict(read(out))
    assert code == sample_random_code(4, 7)
    assert not list(tmp_path.glob(".code.json.*"))


def test_solve_example_profile(tmp_path, example_profile):
    out = tmp_path / "sol.json"
    assert run("solve", "--profile", example_profile, "--all", "-o", out) == 0
    sol = SolveOutcome.from_dict(read(out))
    assert len(sol.solutions) == 1 and sol.solutions[0] == canonicalize(hamming_7_4())


def test_solve_impossible_exit_1(tmp_path, capsys):
    bad = tmp_path / "impossible.json"
    prof = MiscorrectionProfile.from_mapping(4, {(0,): {1, 2, 3}, (1,): {0, 2, 3}, (2,): {0, 1, 3}})
    bad.write_text(json.dumps(prof.to_dict()))
    assert run("solve", "--profile", bad, "-o", tmp_path / "s.json") == 1
    assert "no code satisfies profile" in capsys.readouterr().err


@pytest.mark.parametrize("k, seed", [(8, 3), (16, 4)])
def test_round_trip_gen_profile_solve(tmp_path, k, seed):
    code, prof, sol = tmp_path / "c.json", tmp_path / "p.json", tmp_path / "s.json"
    assert run("gen-code", "--k", k, "--seed", seed, "-o", code) == 0
    assert run("profile", "--code", code, "--weights", "1,2", "-o", prof) == 0
    assert load_profile(read(prof)).k == k
    assert run("solve", "--profile", prof, "--all", "-o", sol) == 0
    got = SolveOutcome.from_dict(read(sol))
    assert got.solutions == [canonicalize(code_from_dict(read(code)))]


def test_profile_mc_observed_and_solve_from_counts(tmp_path):
    code, prof, obs, sol = (tmp_path / n for n in ("c.json", "p.json", "o.json", "s.json"))
    run("gen-code", "--k", 8, "--seed", 1, "-o", code)
    assert run("profile", "--code", code, "--mode", "mc", "--words", 20000, "--seed", 3,
               "--noise", 1e-4, "--observed-out", obs, "-o", prof) == 0
    assert read(obs)["format"] == "beer-observed-v1"
    assert run("solve", "--profile", obs, "-o", sol) == 0
    assert len(read(sol)["solutions"]) == 1
    exh = tmp_path / "e.json"
    run("profile", "--code", code, "-o", exh)
    assert load_profile(read(prof)) == load_profile(read(exh))


def test_profile_mc_requires_seed(tmp_path):
    code = tmp_path / "c.json"
    run("gen-code", "--k", 4, "--seed", 1, "-o", code)
    assert run("profile", "--code", code, "--mode", "mc") == 2


def test_profile_and_solve_with_anti_cells(tmp_path):
    code, prof, sol = tmp_path / "c.json", tmp_path / "p.json", tmp_path / "s.json"
    run("gen-code", "--k", 11, "--seed", 2, "-o", code)
    assert run("profile", "--code", code, "--anti-cells", "0,3,12", "-o", prof) == 0
    assert read(prof)["anti_cells"] == [0, 3, 12]
    assert run("solve", "--profile", prof, "-o", sol) == 0
    assert len(read(sol)["solutions"]) == 1
    assert run("profile", "--code", code, "--anti-cells", "99") == 2


def test_check_equiv(tmp_path, capsys):
    a, b, c = tmp_path / "a.json", tmp_path / "b.json", tmp_path / "c.json"
    code = hamming_7_4()
    a.write_text(json.dumps(code.to_dict()))
    rows = code.to_dict()
    rows["P"] = [rows["P"][1], rows["P"][0], rows["P"][2]]
    b.write_text(json.dumps(rows))
    c.write_text(json.dumps(sample_random_code(4, 1).to_dict()))
    assert run("check-equiv", a, b) == 0
    assert capsys.readouterr().out.strip() == "equivalent"
    same = canonicalize(sample_random_code(4, 1)) == canonicalize(code)
    assert run("check-equiv", a, c) == (0 if same else 1)


def test_beep_command(tmp_path):
    code, rep = tmp_path / "c.json", tmp_path / "r.json"
    code.write_text(json.dumps(hamming_7_4().to_dict()))
    assert run("beep", "--code", code, "--mask", "5,6", "--seed", 1, "-o", rep) == 0
    obj = read(rep)
    assert obj["format"] == "beep-report-v1" and obj["suspected"] == [5, 6]
    assert run("beep", "--code", code, "--mask", "9", "--seed", 1) == 2
    assert run("beep", "--code", code, "--mask", "5,6") == 2


def test_sweep_formats(tmp_path):
    js, cs = tmp_path / "s.json", tmp_path / "s.csv"
    args = ["sweep", "--experiment", "uniqueness", "--k", "4,8", "--codes-per-k", 3, "--seed", 1]
    assert run(*args, "-o", js) == 0
    assert read(js)["format"] == "beer-sweep-v1"
    assert run(*args, "--format", "csv", "-o", cs) == 0
    lines = cs.read_text().splitlines()
    assert lines[0].startswith("k,code_id,code_seed,solutions") and len(lines) == 7


def test_sweep_noise_defaults_to_half_probability(tmp_path):
    out = tmp_path / "n.json"
    assert run("sweep", "--experiment", "noise", "--k", 4, "--codes-per-k", 2, "--words", 20000,
               "--seed", 1, "-o", out) == 0
    assert all(r["profile_match"] for r in read(out)["records"])


def test_ingest(tmp_path):
    k = 8
    pairs = [(1 << i, (1 << i) ^ (1 << ((i + 1) % k))) for i in range(k)]
    dump, side = tmp_path / "d.bin", tmp_path / "side.json"
    dump.write_bytes(write_dump(pairs, k, 1))
    side.write_text(json.dumps({"format": "beer-dump-v1", "k": k, "word_bytes": 1,
                                "patterns": [[i] for i in range(k)]}))
    obs, prof = tmp_path / "o.json", tmp_path / "p.json"
    assert run("ingest", "--dump", dump, "--sidecar", side, "-o", obs, "--profile-out", prof) == 0
    assert read(obs)["entries"][0]["counts"] == [0, 1, 0, 0, 0, 0, 0, 0]
    assert read(prof)["entries"][0]["miscorrectable"] == [1]
    side.write_text(json.dumps({"format": "wrong"}))
    assert run("ingest", "--dump", dump, "--sidecar", side) == 2


def test_usage_and_format_errors(tmp_path, capsys):
    assert run("gen-code", "--k", 4) == 2
    assert run("gen-code", "--k", 4, "--seed", 1, "--bogus") == 2
    assert run("solve", "--profile", tmp_path / "missing.json") == 2
    junk = tmp_path / "junk.json"
    junk.write_text("{not json")
    assert run("solve", "--profile", junk) == 2
    wrong = tmp_path / "wrong.json"
    wrong.write_text(json.dumps({"format": "beer-code-v1"}))
    assert run("solve", "--profile", wrong) == 2
    invalid = tmp_path / "invalid.json"
    invalid.write_text(json.dumps({"format": "beer-code-v1", "k": 4, "n": 7,
                                   "P": [[1, 1, 1, 0], [1, 1, 0, 1], [0, 0, 1, 1]]}))
    assert run("profile", "--code", invalid) == 1
    capsys.readouterr()


def test_jobs_do_not_change_outputs(tmp_path):
    code = tmp_path / "c.json"
    run("gen-code", "--k", 11, "--seed", 5, "-o", code)
    outs = []
    for jobs in (1, 2):
        o = tmp_path / f"mc{jobs}.json"
        run("profile", "--code", code, "--mode", "mc", "--words", 5000, "--seed", 9,
            "--noise", 1e-3, "--jobs", jobs, "-o", o)
        outs.append(o.read_bytes())
    assert outs[0] == outs[1]


def test_help_and_console_script():
    out = subprocess.run([sys.executable, "-m", "beer.cli", "--help"], capture_output=True, text=True)
    assert out.returncode == 0
    for name in ("gen-code", "profile", "solve", "check-equiv", "beep", "sweep", "ingest"):
        assert name in out.stdout
    assert run("solve", "--help") == 0
