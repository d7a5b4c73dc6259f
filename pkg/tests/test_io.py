import json

import numpy as np
import pytest
import yaml

from invcone.errors import ConfigError
from invcone.io import bundled_system_path, load_system, parse_system, read_table, write_summary, write_table

BASE = {"M": [[1, 0], [0, 1]], "K": [[1.5, -1.5], [-1.5, 2.5]], "w": [-1, 0], "kn": 1.5, "delta": 1.0}


def test_bundled_files_load():
    s = load_system(bundled_system_path("jiang"))
    assert s.delta == 1.0 and s.alpha == 1.0
    assert np.allclose(s.C, 0.005 * s.K)
    assert np.allclose(s.f, [0.05, 0.0])
    h = load_system(bundled_system_path("jiang_homogeneous"))
    assert h.delta == 0.0


def test_overrides():
    s = parse_system(dict(BASE), {"delta": 2.0, "alpha": 0.5, "f_amp": 0.2})
    assert s.delta == 2.0 and s.alpha == 0.5
    assert np.allclose(s.f, [0.2, 0.0])
    s = parse_system(dict(BASE, f=[0.0, -0.1]), {"f_amp": 0.3})
    assert np.allclose(s.f, [0.0, -0.3])


@pytest.mark.parametrize(
    "patch, field",
    [
        ({"K": [[1.5, -1.5], [-1.5]]}, "K[1]"),
        ({"K": [[1.5, "a"], [-1.5, 2.5]]}, "K[0][1]"),
        ({"w": [1, 0, 0]}, "w"),
        ({"kn": -1.0}, "kn"),
        ({"kn": True}, "kn"),
        ({"delta": float("nan")}, "delta"),
        ({"M": []}, "M"),
        ({"extra": 1}, "<root>"),
    ],
)
def test_schema_errors_name_the_field(patch, field):
    with pytest.raises(ConfigError) as err:
        parse_system(dict(BASE, **patch))
    assert err.value.field == field


def test_missing_field_and_bad_yaml(tmp_path):
    data = dict(BASE)
    del data["kn"]
    with pytest.raises(ConfigError) as err:
        parse_system(data)
    assert err.value.field == "kn"
    p = tmp_path / "bad.yaml"
    p.write_text("M: [[1, 0]\n")
    with pytest.raises(ConfigError):
        load_system(p)
    with pytest.raises(ConfigError):
        load_system(tmp_path / "missing.yaml")
    p.write_text("- 1\n- 2\n")
    with pytest.raises(ConfigError):
        load_system(p)


def test_round_trip(tmp_path):
    p = tmp_path / "s.yaml"
    p.write_text(yaml.safe_dump(dict(BASE, C=[[0.1, 0], [0, 0.1]], alpha=2.0)))
    s = load_system(p)
    assert s.alpha == 2.0 and s.has_damping


def test_tables_are_exact(tmp_path):
    rows = [[1, np.pi, True], [2, 1e-300, False]]
    path = write_table(tmp_path / "a" / "t.csv", ["k", "x", "flag"], rows)
    header, data = read_table(path)
    assert header == ["k", "x", "flag"]
    assert data[0, 1] == np.pi and data[1, 1] == 1e-300
    assert path.read_text().splitlines()[1].startswith("1,3.1415926535897931e+00,1")
    with pytest.raises(ValueError):
        write_table(tmp_path / "u.csv", ["a"], [[1, 2]])


def test_summary_json(tmp_path):
    path = write_summary(tmp_path / "s.json", {"b": np.float64(1.5), "a": np.array([1, 2]), "ok": np.bool_(True),
                                               "bad": float("inf")})
    d = json.loads(path.read_text())
    assert d == {"a": [1, 2], "b": 1.5, "bad": "inf", "ok": True}
    assert list(d) == sorted(d)
