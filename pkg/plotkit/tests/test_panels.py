import hashlib
from pathlib import Path

import pytest

from plotkit import PanelSpec, PanelSpecError, render

DATA = Path(__file__).parent / "data" / "runs"


def _sha(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _tree_hashes(root: Path) -> dict[str, str]:
    return {str(p.relative_to(root)): _sha(p) for p in sorted(root.rglob("*")) if p.is_file()}


def test_timeseries_panel(tmp_path):
    panel = PanelSpec(
        kind="timeseries",
        inputs=["demo/*.csv"],
        legend_from="h0",
        base_dir=DATA,
    )
    png, svg = render(panel, out_base=tmp_path / "series")
    assert png.read_bytes()[:4] == b"\x89PNG"
    text = svg.read_text()
    assert text.lstrip().startswith("<?xml")
    assert "h0=0" in text and "h0=2" in text


def test_single_series_still_gets_legend(tmp_path):
    panel = PanelSpec(
        kind="timeseries",
        inputs=["demo/demo_theta-0_h0-2.csv"],
        legend_from="h0",
        base_dir=DATA,
    )
    _, svg = render(panel, out_base=tmp_path / "one")
    assert "h0=2" in svg.read_text()


def test_timeseries_entropy_alias_and_bad_column(tmp_path):
    panel = PanelSpec(kind="timeseries", inputs=["demo/*h0-0.csv"], y="entropy", base_dir=DATA)
    render(panel, out_base=tmp_path / "ent")
    panel.y = "sz_3"
    render(panel, out_base=tmp_path / "sz")
    panel.y = "voltage"
    with pytest.raises(PanelSpecError, match="voltage"):
        render(panel, out_base=tmp_path / "bad")


def test_average_panel_groups_by_parameter(tmp_path):
    panel = PanelSpec(
        kind="average-vs-parameter",
        inputs=["demo/summary.json"],
        parameter="h0",
        group_by="theta",
        base_dir=DATA,
    )
    _, svg = render(panel, out_base=tmp_path / "avg")
    text = svg.read_text()
    assert "theta=0" in text and "theta=2.0944" in text


def test_average_panel_entropy_value(tmp_path):
    panel = PanelSpec(
        kind="average-vs-parameter",
        inputs=["demo/summary.json"],
        parameter="h0",
        value="entropy_avg",
        base_dir=DATA,
    )
    render(panel, out_base=tmp_path / "avg")


def test_average_panel_unknown_parameter(tmp_path):
    panel = PanelSpec(
        kind="average-vs-parameter",
        inputs=["demo/summary.json"],
        parameter="voltage",
        base_dir=DATA,
    )
    with pytest.raises(PanelSpecError, match="voltage"):
        render(panel, out_base=tmp_path / "bad")


def test_dos_panel(tmp_path):
    panel = PanelSpec(kind="dos", inputs=["peaks/*_dos.csv"], legend_from="J0", base_dir=DATA)
    _, svg = render(panel, out_base=tmp_path / "dos")
    text = svg.read_text()
    assert "J0=0.1" in text and "J0=0.4" in text


def test_scaling_panel_with_and_without_fit(tmp_path):
    panel = PanelSpec(kind="scaling", inputs=["scale/scale.csv"], base_dir=DATA)
    _, svg = render(panel, out_base=tmp_path / "fit")
    assert "slope" in svg.read_text()
    panel.fit = False
    _, svg = render(panel, out_base=tmp_path / "nofit")
    assert "slope" not in svg.read_text()


def test_empty_glob_is_an_error(tmp_path):
    panel = PanelSpec(kind="dos", inputs=["missing/*.csv"], base_dir=DATA)
    with pytest.raises(PanelSpecError, match="matched"):
        render(panel, out_base=tmp_path / "none")
    assert list(tmp_path.iterdir()) == []


def test_missing_output_is_an_error():
    panel = PanelSpec(kind="dos", inputs=["peaks/*_dos.csv"], base_dir=DATA)
    with pytest.raises(PanelSpecError, match="output"):
        render(panel)


def test_axis_ranges_and_labels(tmp_path):
    panel = PanelSpec(
        kind="timeseries",
        inputs=["demo/*h0-2.csv"],
        xlabel="time",
        ylabel="signal",
        title="demo",
        x_range=(0.0, 5.0),
        y_range=(-1.0, 1.0),
        base_dir=DATA,
    )
    _, svg = render(panel, out_base=tmp_path / "axes")
    text = svg.read_text()
    assert "time" in text and "signal" in text and "demo" in text


def test_rendering_never_mutates_inputs(tmp_path):
    before = _tree_hashes(DATA)
    panel = PanelSpec(kind="scaling", inputs=["scale/scale.csv"], base_dir=DATA)
    render(panel, out_base=tmp_path / "out")
    assert _tree_hashes(DATA) == before


def test_rerender_is_idempotent(tmp_path):
    panel = PanelSpec(kind="dos", inputs=["peaks/*_dos.csv"], base_dir=DATA)
    first = render(panel, out_base=tmp_path / "same")
    hashes = [_sha(p) for p in first]
    second = render(panel, out_base=tmp_path / "same")
    assert first == second
    assert [_sha(p) for p in second] == hashes
