import json

from rpnodesim.cli import main


def run(*argv):
    return main(list(argv))


def test_theory_student_t_sf_json(tmp_path, capsys):
    out = tmp_path / "t.json"
    assert run("theory", "--op", "student_t_sf", "--x", "0", "--q", "50",
               "--out", str(out)) == 0
    payload = json.loads(out.read_text())
    assert payload["value"] == 0.5
    assert payload["op"] == "student_t_sf"
    assert payload["seed"] == 42


def test_theory_to_stdout(capsys):
    assert run("theory", "--op", "jl_min_q_dot", "--epsilon", "0.5",
               "--delta", "0.5", "--k", "2") == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["value"] == 34


def test_gen_then_flip_pipeline(tmp_path, capsys):
    mtx = tmp_path / "g.mtx"
    assert run("gen", "--kind", "flip_gadget", "--du", "32", "--dv", "2",
               "--out", str(mtx)) == 0
    report = tmp_path / "flip.csv"
    assert run("flip", "--graph", str(mtx), "--kind", "dotT", "--q", "64",
               "--trials", "2000", "--out", str(report)) == 0
    lines = [l for l in report.read_text().splitlines() if not l.startswith("#")]
    header = lines[0].split(",")
    row = dict(zip(header, lines[1].split(",")))
    assert 0.0 <= float(row["empirical"]) <= 1.0
    assert abs(float(row["empirical"]) - float(row["predicted"])) < 0.05


def test_gen_powerlaw_and_ndcg(tmp_path):
    mtx = tmp_path / "p.mtx"
    assert run("gen", "--kind", "erdos_renyi", "--n", "90", "--p", "0.15",
               "--out", str(mtx)) == 0
    report = tmp_path / "ndcg.csv"
    assert run("ndcg", "--graph", str(mtx), "--q", "8", "--K", "5", "--m", "10",
               "--kinds", "dotA,dotT,cosine", "--out", str(report)) == 0
    text = report.read_text()
    assert "experiment,seed,stratum,node,degree,kind,eta" in text
    assert "# summary_stratum0_dotA" in text
    data_rows = [l for l in text.splitlines() if l and not l.startswith("#")][1:]
    assert len(data_rows) == 3 * 10 * 3


def test_embed_roundtrip(tmp_path):
    mtx = tmp_path / "g.mtx"
    run("gen", "--kind", "erdos_renyi", "--n", "20", "--p", "0.3", "--out", str(mtx))
    emb = tmp_path / "e.rpne"
    assert run("embed", "--graph", str(mtx), "--q", "8", "--family", "T",
               "--normalize", "--out", str(emb)) == 0
    from rpnodesim import load_embedding
    x = load_embedding(emb)
    assert x.n == 20 and x.q == 8 and x.normalized


def test_jl_subcommand(tmp_path):
    mtx = tmp_path / "g.mtx"
    run("gen", "--kind", "erdos_renyi", "--n", "15", "--p", "0.3", "--out", str(mtx))
    rep = tmp_path / "jl.csv"
    assert run("jl", "--graph", str(mtx), "--epsilon", "0.3", "--delta", "0.2",
               "--bound", "dot", "--draws", "10", "--out", str(rep)) == 0
    assert "# violating_fraction" in rep.read_text()


def test_mc_subcommand(tmp_path):
    mtx = tmp_path / "g.mtx"
    run("gen", "--kind", "erdos_renyi", "--n", "12", "--p", "0.5", "--out", str(mtx))
    rep = tmp_path / "mc.csv"
    assert run("mc", "--graph", str(mtx), "--u", "0", "--v", "1", "--kind", "cosine",
               "--q", "32", "--trials", "200", "--out", str(rep)) == 0
    assert "sample_mean" in rep.read_text()


def test_identical_invocations_identical_bytes(tmp_path):
    mtx = tmp_path / "g.mtx"
    run("gen", "--kind", "erdos_renyi", "--n", "40", "--p", "0.2", "--out", str(mtx))
    r1, r2 = tmp_path / "a.csv", tmp_path / "b.csv"
    for r in (r1, r2):
        run("ndcg", "--graph", str(mtx), "--q", "8", "--K", "3", "--m", "5",
            "--seed", "7", "--out", str(r))
    assert r1.read_bytes() == r2.read_bytes()


def test_usage_errors_exit_one(capsys):
    assert run("theory", "--op", "nope") == 1
    assert run("gen", "--kind", "flip_gadget") == 1  # missing --out
    assert run("frobnicate") == 1


def test_data_errors_exit_two(tmp_path, capsys):
    missing = run("ndcg", "--graph", str(tmp_path / "absent.mtx"), "--q", "4")
    assert missing == 2
    mtx = tmp_path / "g.mtx"
    run("gen", "--kind", "erdos_renyi", "--n", "10", "--p", "0.3", "--out", str(mtx))
    assert run("mc", "--graph", str(mtx), "--u", "99", "--v", "0", "--kind", "dotA",
               "--q", "8", "--trials", "200") == 2
    err = capsys.readouterr().err
    assert "99" in err


def test_missing_kind_parameter_exits_two(tmp_path):
    assert run("gen", "--kind", "erdos_renyi", "--n", "10",
               "--out", str(tmp_path / "x.mtx")) == 2  # --p required


def test_help_screens(capsys):
    for sub in ("gen", "embed", "theory", "mc", "flip", "ndcg", "jl"):
        assert run(sub, "--help") == 0
        assert "--seed" in capsys.readouterr().out


def test_threads_env_fallback(tmp_path, monkeypatch):
    mtx = tmp_path / "g.mtx"
    run("gen", "--kind", "erdos_renyi", "--n", "30", "--p", "0.2", "--out", str(mtx))
    out1, out2 = tmp_path / "one.csv", tmp_path / "two.csv"
    run("mc", "--graph", str(mtx), "--u", "0", "--v", "1", "--kind", "dotA",
        "--q", "16", "--trials", "300", "--out", str(out1))
    monkeypatch.setenv("RPNODESIM_THREADS", "3")
    run("mc", "--graph", str(mtx), "--u", "0", "--v", "1", "--kind", "dotA",
        "--q", "16", "--trials", "300", "--out", str(out2))
    assert out1.read_bytes() == out2.read_bytes()  # thread count never changes output
