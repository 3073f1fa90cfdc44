import json
from pathlib import Path

from plotkit.cli import entry

DATA = Path(__file__).parent / "data" / "runs"


def write_spec(tmp_path, doc, name="panel.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return path


def test_single_panel_with_out(tmp_path, capsys):
    spec = write_spec(tmp_path, {
        "kind": "timeseries",
        "inputs": [str(DATA / "demo" / "*.csv")],
        "legend_from": "h0",
    })
    assert entry([str(spec), "--out", str(tmp_path / "fig")]) == 0
    assert (tmp_path / "fig.png").exists()
    assert (tmp_path / "fig.svg").exists()
    out = capsys.readouterr().out.splitlines()
    assert out == [str(tmp_path / "fig.png"), str(tmp_path / "fig.svg")]


def test_out_suffix_is_stripped(tmp_path):
    spec = write_spec(tmp_path, {"kind": "dos", "inputs": [str(DATA / "peaks" / "*_dos.csv")]})
    assert entry([str(spec), "--out", str(tmp_path / "fig.png")]) == 0
    assert (tmp_path / "fig.png").exists()
    assert (tmp_path / "fig.svg").exists()
    assert not (tmp_path / "fig.png.png").exists()


def test_panel_output_field_used_without_out(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    spec = write_spec(tmp_path, {
        "kind": "scaling",
        "inputs": [str(DATA / "scale" / "scale.csv")],
        "output": "figures/scaling",
    })
    assert entry([str(spec)]) == 0
    assert (tmp_path / "figures" / "scaling.png").exists()
    assert (tmp_path / "figures" / "scaling.svg").exists()


def test_multi_panel_out_directory(tmp_path):
    spec = write_spec(tmp_path, {
        "panels": [
            {
                "kind": "timeseries",
                "inputs": [str(DATA / "demo" / "*h0-2.csv")],
                "output": "series",
            },
            {
                "kind": "dos",
                "inputs": [str(DATA / "peaks" / "*_dos.csv")],
                "output": "spectra",
            },
        ]
    })
    assert entry([str(spec), "--out", str(tmp_path / "figs")]) == 0
    for name in ("series", "spectra"):
        assert (tmp_path / "figs" / f"{name}.png").exists()
        assert (tmp_path / "figs" / f"{name}.svg").exists()


def test_multi_panel_needs_output_names(tmp_path):
    spec = write_spec(tmp_path, {
        "panels": [
            {"kind": "dos", "inputs": [str(DATA / "peaks" / "*_dos.csv")]},
            {"kind": "dos", "inputs": [str(DATA / "peaks" / "*_dos.csv")]},
        ]
    })
    assert entry([str(spec), "--out", str(tmp_path / "figs")]) == 1


def test_error_exit_codes(tmp_path):
    assert entry([str(tmp_path / "missing.json")]) == 1

    bad = tmp_path / "bad.json"
    bad.write_text("{oops")
    assert entry([str(bad)]) == 1

    empty = write_spec(tmp_path, {
        "kind": "dos",
        "inputs": [str(tmp_path / "void" / "*.csv")],
    }, name="empty.json")
    assert entry([str(empty), "--out", str(tmp_path / "fig")]) == 1
    assert not (tmp_path / "fig.png").exists()
