import numpy as np
import pytest

from anisomorrey.grid import Box, GridFunction
from anisomorrey.gridio import parse_header, read_grid, write_grid


@pytest.mark.parametrize("name", ["f.csv", "f.json"])
def test_roundtrip_is_bit_identical(tmp_path, name):
    rng = np.random.default_rng(1)
    gf = GridFunction(Box([-1.0, 0.0], [1.0, 3.5]), rng.normal(size=(5, 7)) * 10.0 ** rng.integers(-300, 300, (5, 7)))
    path = tmp_path / name
    write_grid(gf, path)
    back = read_grid(path)
    assert back.domain == gf.domain
    assert back.values.tobytes() == gf.values.tobytes()
    write_grid(back, tmp_path / ("again_" + name))
    assert (tmp_path / ("again_" + name)).read_bytes() == path.read_bytes()


def test_header_parse():
    dom, shape = parse_header("# domain=-1.0:1.0,0.0:2.0 shape=4,8")
    assert shape == (4, 8)
    assert dom == Box([-1.0, 0.0], [1.0, 2.0])


@pytest.mark.parametrize("text", ["domain=-1:1 shape=4\n1\n", "# domain=-1 shape=2\n1\n2\n", "# domain=-1:1 shape=3\n1\n2\n", ""])
def test_bad_files(tmp_path, text):
    path = tmp_path / "bad.csv"
    path.write_text(text)
    with pytest.raises(ValueError):
        read_grid(path)
