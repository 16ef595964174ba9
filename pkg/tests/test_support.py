import json
import re
from xml.etree import ElementTree

import numpy as np
import pytest

from polilean.config import apply_overrides, build, coerce, csv_list, read_config, synth_config
from polilean.errors import ConfigError, DataError
from polilean.manifest import RunManifest, read_manifest, sha256_file, verify_manifest
from polilean.svg import confusion_svg, scatter_svg
from polilean.walks import WalkConfig


def test_scatter_counts_points_and_legend():
    svg = scatter_svg([[0, 0], [1, 1], [2, 0], [3, 1]], ["A", "B", "A", "B"], ["A", "B"],
                      {"A": "#112233", "B": "#445566"}, "t<1>")
    root = ElementTree.fromstring(svg)
    ns = "{http://www.w3.org/2000/svg}"
    assert len([c for c in root.iter(ns + "circle") if c.get("class") == "point"]) == 4
    assert len([g for g in root.iter(ns + "g") if g.get("class") == "legend-entry"]) == 2
    assert "t&lt;1&gt;" in svg and svg.count("#112233") == 3


def test_scatter_is_deterministic_and_rejects_3d():
    args = ([[0.5, 1.0], [2.0, -1.0]], ["x", "y"], ["x", "y"], {})
    assert scatter_svg(*args) == scatter_svg(*args)
    with pytest.raises(DataError):
        scatter_svg(np.zeros((3, 3)), ["a"] * 3, ["a"], {})
    with pytest.raises(DataError):
        scatter_svg(np.zeros((3, 2)), ["a"] * 2, ["a"], {})


def test_scatter_handles_degenerate_inputs():
    ElementTree.fromstring(scatter_svg(np.zeros((0, 2)), [], ["a"], {}))
    ElementTree.fromstring(scatter_svg(np.ones((3, 2)), ["a"] * 3, ["a"], {}))


def test_confusion_heatmap():
    svg = confusion_svg([[3, 1], [0, 4]], ["P", "Q"], "c")
    ElementTree.fromstring(svg)
    assert svg.count('class="cell"') == 4
    assert re.search(r">3<", svg) and re.search(r">4<", svg)
    with pytest.raises(DataError):
        confusion_svg([[1]], ["P", "Q"])


def test_manifest_round_trip(tmp_path):
    art = tmp_path / "out" / "a.txt"
    art.parent.mkdir()
    art.write_text("hello")
    inp = tmp_path / "in.txt"
    inp.write_text("x")
    m = RunManifest(["polilean", "x"], {"s": {"k": "v"}}, {"embed": 3}, root=tmp_path / "out")
    m.add_input(inp)
    m.add_artifact(art)
    with m.stage("work"):
        pass
    path = m.write()
    doc = json.loads(path.read_text())
    assert doc["format"] == "polilean-manifest" and doc["artifacts"] == {"a.txt": sha256_file(art)}
    assert doc["seeds"] == {"embed": 3} and doc["timings"]["work"] >= 0
    back = read_manifest(path)
    assert back.artifacts == m.artifacts and back.command == ["polilean", "x"]
    assert verify_manifest(path) == []
    assert sha256_file(art) == "2cf24dba5fb0a30e26e83b2ac5b9e29e1b161e5c1fa7425e73043362938b9824"


def test_manifest_rejects_other_json(tmp_path):
    p = tmp_path / "m.json"
    p.write_text("{}")
    with pytest.raises(DataError):
        read_manifest(p)
    with pytest.raises(DataError):
        read_manifest(tmp_path / "none.json")


def test_config_reading_and_overrides(tmp_path):
    p = tmp_path / "c.ini"
    p.write_text("# comment\n[walks]\nwalk_length = 40 ; short\nP = 2\n[region.X]\nparties = A,B\n")
    secs = read_config(p)
    assert secs["walks"] == {"walk_length": "40", "P": "2"}
    merged = apply_overrides(secs, ["walks.q=0.5", "synth.mixing.member=0.2", "region.X.colors=#1,#2"])
    assert merged["walks"]["q"] == "0.5" and merged["synth"] == {"mixing.member": "0.2"}
    assert merged["region.X"]["colors"] == "#1,#2"
    assert "q" not in secs["walks"]
    for bad in ("walks", "walks.=1", ".x=1", "walks.q"):
        with pytest.raises(ConfigError):
            apply_overrides({}, [bad])
    with pytest.raises(ConfigError):
        read_config(tmp_path / "missing.ini")


def test_coerce_and_build():
    assert coerce("yes", False) is True and coerce("0", True) is False
    assert coerce("7", 1) == 7 and coerce("2.5", 1.0) == 2.5 and coerce("none", None) is None
    with pytest.raises(ConfigError):
        coerce("maybe", True)
    with pytest.raises(ConfigError):
        coerce("1.5", 3)
    cfg = build(WalkConfig, {"walk_length": "40", "q": "0.25"}, "walks")
    assert cfg.walk_length == 40 and cfg.q == 0.25 and cfg.window == WalkConfig().window
    with pytest.raises(ConfigError, match="unknown key"):
        build(WalkConfig, {"length": "3"}, "walks")
    assert csv_list(" a, b ,,c", []) == ["a", "b", "c"] and csv_list(None, ["z"]) == ["z"]


def test_synth_config_sections():
    cfg = synth_config({"synth": {"seed": "3", "mixing.member": "0.0", "mixing.supporter": "0.1",
                                  "mixing.sympathizer": "0.2", "activity_scale.supporter": "0.5"},
                        "region.Q": {"parties": "A, B, C", "members_per_party": "4"}})
    assert cfg.seed == 3 and cfg.mixing["member"] == 0.0 and cfg.activity_scale == {"supporter": 0.5}
    assert cfg.regions[0].name == "Q" and cfg.regions[0].parties == ["A", "B", "C"]
    assert cfg.regions[0].members_per_party == 4
    preset = synth_config({"synth": {"preset": "uk-like"}})
    assert [r.name for r in preset.regions] == ["SCT", "WAL", "NIR"]
    for bad in ({"synth": {"preset": "mars"}}, {"synth": {"oops": "1"}},
                {"synth": {}, "region.Q": {"parties": "A,B", "colors": "#1"}}, {"synth": {}}):
        with pytest.raises(ConfigError):
            synth_config(bad)
