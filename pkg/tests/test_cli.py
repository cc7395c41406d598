import json
import math
from importlib import resources

import pytest

from reqcomplexity.cli import main
from reqcomplexity.graph import WeightedGraph, path_graph
from reqcomplexity.stats import fisher_ci
from reqcomplexity.tasks import IntegrationTask, task_to_dict

DATA = resources.files("reqcomplexity") / "data"
THREE = "1 The system shall deploy.\n1.1 The gear (see 1.2) shall lock.\n1.2 The actuator shall extend.\n"


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def write(path, text):
    path.write_text(text, encoding="utf-8")
    return path


@pytest.fixture
def k4(tmp_path):
    pairs = [(a, b) for a in "abcd" for b in "abcd" if a < b]
    return write(tmp_path / "k4.edges", "".join(f"{a} {b}\n" for a, b in pairs))


def test_extract_three_requirements(tmp_path, capsys):
    doc = write(tmp_path / "req.txt", THREE)
    lex = write(tmp_path / "lex.txt", "gear\nactuator\n")
    out = tmp_path / "g.json"
    code, _, _ = run(capsys, "extract", "--input", doc, "--lexicon", lex, "--out", out, "--no-timestamp")
    assert code == 0
    g = json.loads(out.read_text())
    assert (len(g["nodes"]), len(g["edges"])) == (5, 5)
    report = json.loads((tmp_path / "g.report.json").read_text())
    assert report["layer_edges"] == {"hierarchy": 2, "reference": 1, "entity_mention": 2}
    assert "generated_at" not in report


def test_extract_empty_document_warns(tmp_path, capsys):
    doc = write(tmp_path / "empty.txt", "")
    code, out, err = run(capsys, "extract", "--input", doc)
    assert code == 0
    assert json.loads(out)["nodes"] == []
    assert "no requirements" in json.loads(err.strip().splitlines()[-1])["warning"]


def test_extract_malformed_id(tmp_path, capsys):
    doc = write(tmp_path / "bad.txt", "1 ok\n1..2 broken\n")
    code, out, err = run(capsys, "extract", "--input", doc)
    assert code == 3 and out == ""
    record = json.loads(err)
    assert record["code"] == 3 and "\n" not in err.rstrip("\n")


def test_extract_emit_task(tmp_path, capsys):
    out = tmp_path / "t.json"
    code, _, _ = run(capsys, "extract", "--input", DATA / "sample_requirements.txt",
                     "--lexicon", DATA / "sample_lexicon.txt", "--emit-task", "--task-id", "lg",
                     "--out", out, "--no-timestamp")
    assert code == 0
    task = json.loads(out.read_text())
    assert task["task_id"] == "lg" and len(task["components"]) == 3


def test_analyze_k4(k4, capsys):
    code, out, _ = run(capsys, "analyze", "--input", k4, "--metrics", "GE,CC,Load", "--no-timestamp")
    assert code == 0
    entry = json.loads(out)["entries"][0]
    assert entry["metrics"]["GE"] == pytest.approx(6.0, abs=1e-9)
    assert entry["metrics"]["CC"] == 4 and entry["metrics"]["Load"] == 3


def test_analyze_tree_task_density_delta(tmp_path, capsys):
    comps = (path_graph(2), path_graph(2).relabel({"0": "2", "1": "3"}))
    assembly = WeightedGraph.from_edges([("0", "1"), ("2", "3"), ("1", "2")])
    task = task_to_dict(IntegrationTask("tree", comps, assembly))
    path = write(tmp_path / "tree.json", json.dumps(task))
    code, out, _ = run(capsys, "analyze", "--input", path, "--no-timestamp")
    assert code == 0
    entry = json.loads(out)["entries"][0]
    assert entry["kind"] == "task"
    assert entry["integration_level"]["Integration Density Delta"] == 0.0


def test_analyze_empty_graph_is_domain_error(tmp_path, capsys):
    path = write(tmp_path / "empty.edges", "# nothing\n")
    code, _, err = run(capsys, "analyze", "--input", path, "--metrics", "NLGE")
    assert code == 4 and json.loads(err)["error"] == "DomainError"


def test_analyze_unknown_metric(k4, capsys):
    code, _, err = run(capsys, "analyze", "--input", k4, "--metrics", "XYZ")
    assert code == 2 and "valid names" in json.loads(err)["message"]


def test_analyze_missing_file(tmp_path, capsys):
    code, _, _ = run(capsys, "analyze", "--input", tmp_path / "nope.edges")
    assert code == 5


def test_analyze_deterministic_sorted_and_parallel(tmp_path, capsys):
    for name, edges in [("b", "x y\ny z\n"), ("a", "x y\n"), ("c", "x y\ny z\nz x\n")]:
        write(tmp_path / f"{name}.edges", edges)
    runs = [run(capsys, "analyze", "--input", tmp_path, "--no-timestamp", *extra)[1]
            for extra in ([], [], ["--jobs", "3"])]
    assert runs[0] == runs[1] == runs[2]
    assert [e["id"] for e in json.loads(runs[0])["entries"]] == ["a", "b", "c"]


def test_analyze_csv(k4, capsys):
    code, out, _ = run(capsys, "analyze", "--input", k4, "--metrics", "GE,Density", "--format", "csv")
    assert code == 0
    assert out.splitlines()[0] == "id,GE,Density"
    assert out.splitlines()[1].startswith("k4,6")


def effort_files(tmp_path, xs, ys, extra=None):
    header = "id,m" + (",flat" if extra is not None else "")
    rows = [f"t{i},{x}" + (f",{extra}" if extra is not None else "") for i, x in enumerate(xs)]
    metrics = write(tmp_path / "metrics.csv", "\n".join([header, *rows]) + "\n")
    effort = write(tmp_path / "effort.csv",
                   "id,effort\n" + "".join(f"t{i},{y}\n" for i, y in enumerate(ys)))
    return metrics, effort


def test_correlate_identity(tmp_path, capsys):
    xs = [1.0, 2.5, 3.0, 7.0, 8.0]
    m, e = effort_files(tmp_path, xs, xs)
    code, out, _ = run(capsys, "correlate", m, e, "--no-timestamp")
    res = json.loads(out)["results"][0]
    assert code == 0 and res["r"] == 1.0 and res["ci_low"] is None


def test_correlate_ci_for_eight_rows(tmp_path, capsys):
    # build y with an exact target correlation against x
    xs = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0]
    noise = [1.0, -1.0, -1.0, 1.0, 1.0, -1.0, -1.0, 1.0]  # orthogonal to 1 and x
    mean_x = sum(xs) / 8
    sx = math.sqrt(sum((x - mean_x) ** 2 for x in xs))
    sn = math.sqrt(8.0)
    r = 0.9420
    ys = [(x - mean_x) / sx * r + n / sn * math.sqrt(1 - r * r) for x, n in zip(xs, noise)]
    m, e = effort_files(tmp_path, xs, ys)
    code, out, _ = run(capsys, "correlate", m, e, "--no-timestamp")
    res = json.loads(out)["results"][0]
    assert res["r"] == pytest.approx(0.9420, abs=1e-9)
    assert res["ci_low"] == pytest.approx(0.7059, abs=0.003)
    assert res["ci_high"] == pytest.approx(0.9897, abs=0.003)
    assert (res["ci_low"], res["ci_high"]) == pytest.approx(fisher_ci(res["r"], 8), abs=1e-9)


def test_correlate_constant_column(tmp_path, capsys):
    m, e = effort_files(tmp_path, [1, 2, 3, 4, 5], [2, 1, 4, 3, 6], extra=7)
    code, out, _ = run(capsys, "correlate", m, e, "--no-timestamp")
    by_metric = {r["metric"]: r for r in json.loads(out)["results"]}
    assert code == 0
    assert by_metric["flat"]["status"] == "undefined correlation"
    assert by_metric["m"]["status"] == "ok"


def test_correlate_too_few_rows(tmp_path, capsys):
    m, e = effort_files(tmp_path, [1, 2, 3], [1, 2, 4])
    code, _, err = run(capsys, "correlate", m, e)
    assert code == 2 and "at least 4" in json.loads(err)["message"]


def test_correlate_regression_ks_and_plot_data(tmp_path, capsys):
    xs = list(range(1, 11))
    ys = [2 + 0.5 * x + (0.3 if x % 2 else -0.3) for x in xs]
    m, e = effort_files(tmp_path, xs, ys)
    plots = tmp_path / "plots"
    code, out, _ = run(capsys, "correlate", m, e, "--regression", "linear,quadratic", "--ks",
                       "--plot-data", plots, "--no-timestamp")
    doc = json.loads(out)
    assert code == 0
    fits = doc["results"][0]["regressions"]
    assert fits["linear"]["beta"][1] == pytest.approx(0.5, abs=0.1)
    assert len(fits["quadratic"]["beta"]) == 3
    assert "Lilliefors" in doc["normality"]["effort"]["note"]
    assert (plots / "pairs.csv").read_text().count("\n") == 11
    assert (plots / "curves.csv").read_text().count("\n") == 1 + 2 * 25


def test_baseline_build_and_check(tmp_path, capsys):
    reports = []
    for i, edges in enumerate(["a b\nb c\n", "a b\nb c\nc a\n", "a b\nb c\nc d\n"]):
        src = write(tmp_path / f"g{i}.edges", edges)
        out = tmp_path / f"r{i}.json"
        assert run(capsys, "analyze", "--input", src, "--metrics", "GE,Load", "--out", out)[0] == 0
        reports.append(out)
    profile = tmp_path / "profile.json"
    assert run(capsys, "baseline", "build", *reports, "--out", profile)[0] == 0
    assert json.loads(profile.read_text())["corpus_size"] == 3
    code, out, _ = run(capsys, "baseline", "check", reports[0], "--profile", profile)
    assert code == 0 and json.loads(out)["flagged"] is False

    k5 = write(tmp_path / "k5.edges", "".join(f"{a} {b}\n" for a in "abcde" for b in "abcde" if a < b))
    big = tmp_path / "big.json"
    run(capsys, "analyze", "--input", k5, "--metrics", "GE,Load", "--out", big)
    code, out, _ = run(capsys, "baseline", "check", big, "--profile", profile)
    assert code == 1
    assert {f["metric"] for f in json.loads(out)["entries"][0]["flags"]} == {"GE", "Load"}
    code, _, _ = run(capsys, "baseline", "check", big)
    assert code == 2


def test_config_file_sets_defaults(tmp_path, k4, capsys):
    cfg = write(tmp_path / "cfg.ini", "[reqcx]\nmetrics = GE\nno-timestamp = true\n")
    code, out, _ = run(capsys, "--config", cfg, "analyze", "--input", k4)
    doc = json.loads(out)
    assert code == 0 and list(doc["entries"][0]["metrics"]) == ["GE"] and "generated_at" not in doc
    bad = write(tmp_path / "bad.ini", "[reqcx]\nbogus = 1\n")
    code, _, err = run(capsys, "--config", bad, "analyze", "--input", k4)
    assert code == 2 and "bogus" in err


def test_usage_errors_are_json(capsys):
    code, _, err = run(capsys, "analyze")
    assert code == 2
    assert json.loads(err)["error"] == "UsageError"
