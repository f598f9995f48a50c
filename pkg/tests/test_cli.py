import json
import subprocess
import sys

import pytest

from bespoke_dt.cli import (
    EXIT_CONFIG,
    EXIT_DATA,
    EXIT_INVARIANT,
    ConfigError,
    main,
    parse_float_grid,
    parse_int_grid,
    parse_losses,
)
from bespoke_dt.sources import dataset_available

SMALL = ["--tau-grid", "0,0.02", "--depths", "2-4", "--seeds", "0,1"]


def run(args, capsys):
    rc = main(args)
    out, err = capsys.readouterr()
    return rc, out, err


def test_grid_parsing():
    assert parse_float_grid("0:0.03:0.005") == (0.0, 0.005, 0.01, 0.015, 0.02, 0.025, 0.03)
    assert parse_float_grid("0, 0.01") == (0.0, 0.01)
    assert parse_int_grid("2-8") == tuple(range(2, 9))
    assert parse_int_grid("2,5,7-8") == (2, 5, 7, 8)
    assert parse_losses("0,1,5") == (0.0, 0.01, 0.05)
    for bad in ("", "a,b", "0:1:0"):
        with pytest.raises(ConfigError):
            parse_float_grid(bad)
    for bad in ("", "x", "2-"):
        with pytest.raises(ConfigError):
            parse_int_grid(bad)


def test_fetch_fixture(capsys):
    rc, out, err = run(["fetch", "--dataset", "seeds"], capsys)
    assert rc == 0 and out.startswith("seeds\t")
    assert all(json.loads(l)["level"] for l in err.strip().splitlines())


def test_fetch_checksum_error(tmp_path, capsys, monkeypatch):
    src = tmp_path / "d.txt"
    src.write_text("1 a\n2 b\n")
    manifest = tmp_path / "m.json"
    manifest.write_text(json.dumps({"version": 1, "datasets": {"toy": {"parts": [{"url": src.as_uri(), "sha256": "0" * 64}]}}}))
    monkeypatch.setenv("BESPOKE_DT_CACHE", str(tmp_path / "cache"))
    rc, _, err = run(["fetch", "--dataset", "toy", "--manifest", str(manifest)], capsys)
    assert rc == EXIT_DATA and "checksum mismatch" in err


def test_fetch_unknown(capsys):
    assert run(["fetch", "--dataset", "nope"], capsys)[0] == EXIT_CONFIG


def test_train_writes_artifacts(tmp_path, capsys):
    out = tmp_path / "t"
    rc, stdout, err = run(["train", "--dataset", "seeds", "--depth", "4", "--out", str(out)], capsys)
    assert rc == 0
    assert {p.name for p in out.iterdir()} == {"tree.json", "lowered.json", "report.json", "manifest.json"}
    man = json.loads((out / "manifest.json").read_text())
    assert len(man["config_hash"]) == 64 and len(man["dataset_checksum"]) == 64
    assert man["config"]["bits"] == 4 and man["config"]["power_budget"] == 2.0
    tree = json.loads((out / "tree.json").read_text())
    assert tree["metadata"]["dataset_checksum"] == man["dataset_checksum"]
    assert "| seeds baseline" in stdout
    logs = [json.loads(l) for l in err.strip().splitlines()]
    assert any(l["msg"] == "trained" and "accuracy" in l for l in logs)


def test_explore_is_byte_identical(tmp_path, capsys):
    outs = []
    for i in range(2):
        out = tmp_path / f"e{i}"
        rc, _, _ = run(["explore", "--dataset", "balance-scale", *SMALL, "--out", str(out)], capsys)
        assert rc == 0
        outs.append(out)
    for name in ("exploration.json", "runs.csv", "summary.md", "manifest.json", "baseline_tree.json"):
        assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()
    rc, _, _ = run(["explore", "--dataset", "balance-scale", *SMALL, "--jobs", "2", "--out", str(tmp_path / "j")], capsys)
    assert (tmp_path / "j" / "exploration.json").read_bytes() == (outs[0] / "exploration.json").read_bytes()


def test_explore_empty_tau_grid(tmp_path, capsys):
    rc, _, err = run(["explore", "--dataset", "seeds", "--tau-grid", "", "--out", str(tmp_path)], capsys)
    assert rc == EXIT_CONFIG and "tau grid is empty" in err


@pytest.mark.parametrize("flags", [["--depths", "0"], ["--tau-grid", "0.02,0.01"], ["--budget-mw", "0"], ["--bits", "0"]])
def test_explore_bad_config(tmp_path, capsys, flags):
    assert run(["explore", "--dataset", "seeds", *flags, "--out", str(tmp_path)], capsys)[0] == EXIT_CONFIG


def test_emit_and_report(tmp_path, capsys):
    ex = tmp_path / "ex"
    assert run(["explore", "--dataset", "balance-scale", *SMALL, "--out", str(ex)], capsys)[0] == 0
    em = tmp_path / "em"
    rc, out, _ = run(["emit", "--dataset", "balance-scale", "--tree", str(ex / "selected_1pct_tree.json"), "--out", str(em)], capsys)
    assert rc == 0
    counts = json.loads(out)
    net = json.loads((em / "netlist.json").read_text())
    assert counts["comparator"] == net["metadata"]["comparator_count"]
    assert "endmodule" in (em / "classifier.v").read_text()
    assert (em / "manifest.json").exists()

    rc, out, _ = run(["report", "--exploration", str(ex / "exploration.json")], capsys)
    assert rc == 0 and "Power reduction (x)" in out and "x |" in out
    d = json.loads((ex / "exploration.json").read_text())
    (tmp_path / "base.json").write_text(json.dumps(d["baseline"]["report"]))
    (tmp_path / "ours.json").write_text(json.dumps(d["selected"]["0.01"]["report"]))
    rc, out, _ = run(["report", "--ours", str(tmp_path / "ours.json"), "--baseline", str(tmp_path / "base.json"), "--out", str(tmp_path / "r.md")], capsys)
    base, ours = d["baseline"]["report"], d["selected"]["0.01"]["report"]
    assert f"{base['total_power'] / ours['total_power']:.2f}x" in out
    assert (tmp_path / "r.md").read_text() == out


def test_report_needs_inputs(capsys):
    assert run(["report"], capsys)[0] == EXIT_CONFIG


def test_emit_rejects_foreign_tree(tmp_path, capsys):
    t = tmp_path / "t"
    assert run(["train", "--dataset", "seeds", "--out", str(t)], capsys)[0] == 0
    rc, _, err = run(["emit", "--dataset", "seeds", "--split-seed", "3", "--tree", str(t / "tree.json"), "--out", str(tmp_path / "e")], capsys)
    assert rc == EXIT_INVARIANT and "invariant" in err


def test_csv_path_dataset(tmp_path, capsys):
    p = tmp_path / "d.csv"
    p.write_text("".join(f"{i % 7},{(i * 3) % 11},{'a' if i % 7 > 3 else 'b'}\n" for i in range(40)))
    rc, out, _ = run(["train", "--dataset", str(p), "--label-column", "2", "--depth", "2", "--out", str(tmp_path / "o")], capsys)
    assert rc == 0 and "100.0" in out


def test_missing_dataset_file(tmp_path, capsys):
    assert run(["train", "--dataset", str(tmp_path / "none.csv"), "--out", str(tmp_path)], capsys)[0] == EXIT_DATA


def test_console_entry_point():
    r = subprocess.run([sys.executable, "-m", "bespoke_dt.cli", "--version"], capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout.strip() == "0.1.0"


@pytest.mark.skipif(not dataset_available("vertebral-2c"), reason="vertebral-2c not in the cache; run `bespoke-dt fetch`")
def test_explore_vertebral_meets_budget(tmp_path, capsys):
    out = tmp_path / "v"
    assert run(["explore", "--dataset", "vertebral-2c", "--out", str(out)], capsys)[0] == 0
    d = json.loads((out / "exploration.json").read_text())
    assert d["selected"]["0.01"]["report"]["meets_budget"] is True
