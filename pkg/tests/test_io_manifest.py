import json

import pytest

from src.PerceptronLab import __version__
from src.PerceptronLab.utils import io
from src.PerceptronLab.utils.shared_context import RunManifest, manifest_path_for


def test_csv_layout(workdir):
    io.write_csv("out/s.csv", "sphere_estimates", [(7, -0.25, 0.001, False)], "s.csv.manifest.json")
    with open("out/s.csv", "rb") as f:
        raw = f.read()
    assert raw == (
        b"# schema=sphere_estimates/v1 manifest=s.csv.manifest.json\n"
        b"seed,f_hat,stderr,truncated\n"
        b"7,-0.25,0.001,False\n"
    )


def test_csv_floats_round_trip(workdir):
    value = 0.1 + 0.2
    io.write_csv("g.csv", "sweep", [(0.847, 0.5, value, value / 3)], version=2)
    comment, header, rows = io.read_csv("g.csv")
    assert comment == "# schema=sweep/v2 manifest=-"
    assert header == io.CSV_SCHEMAS["sweep"]
    assert float(rows[0][2]) == value
    assert float(rows[0][3]) == value / 3


def test_csv_row_width_is_checked(workdir):
    with pytest.raises(ValueError):
        io.write_csv("bad.csv", "binary_counts", [(1, 2)])


def test_json_is_sorted_and_newline_terminated(workdir):
    io.write_json("r.json", {"b": 1, "a": [1.5, None]})
    with open("r.json", "r", encoding="utf-8") as f:
        text = f.read()
    assert text.endswith("}\n")
    assert text.index('"a"') < text.index('"b"')
    assert io.read_json("r.json") == {"a": [1.5, None], "b": 1}


def test_manifest_round_trip(workdir):
    manifest = RunManifest("simulate-binary", {"n_dim": 8, "alpha": 1.0}, master_seed=42)
    manifest.add_output("b.csv")
    manifest.add_output("b.csv")
    manifest.add_context("workers", 2)
    path = manifest.save(manifest_path_for("b.csv"))
    assert path == "b.csv.manifest.json"

    saved = io.read_json(path)
    assert saved["command"] == "simulate-binary"
    assert saved["master_seed"] == 42
    assert saved["parameters"] == {"alpha": 1.0, "n_dim": 8}
    assert saved["outputs"] == ["b.csv"]
    assert saved["context"] == {"workers": 2}
    assert saved["artifact_version"] == __version__
    assert saved["finished"] is not None


def test_manifest_timestamps_are_utc(workdir):
    manifest = RunManifest("sweep")
    manifest.finish()
    data = json.loads(json.dumps(manifest.to_dict()))
    assert data["started"].endswith("Z")
    assert data["finished"].endswith("Z")
    assert data["parameters"] == {}
