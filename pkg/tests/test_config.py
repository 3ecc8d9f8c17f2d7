import pytest

from gadgetlab.config import ConfigError, load_config, parse_config, render_config
from gadgetlab.groups import build_group
from gadgetlab.lattice import TriangularLattice
from gadgetlab.model import ModelSpec, build_model, default_spec, fingerprint

QD_TEXT = """
[lattice]
kind = square
Lx = 2
Ly = 1
periodic = no

[model]
variant = quantum_double
qd_shield = vertical-inverse

[couplings]
U = 1
t = 0.3
J = 0.05

[group]
table = 0 1 2 / 1 2 0 / 2 0 1
generators = 1
"""


def test_defaults():
    spec = parse_config("")
    assert spec.variant == "toric" and spec.lattice.Lx == 2 and spec.J == 0.09


def test_quantum_double_table():
    spec = parse_config(QD_TEXT)
    assert spec.group.order == 3 and spec.qd_shield == "vertical-inverse"
    assert not spec.lattice.periodic and spec.t == 0.3


@pytest.mark.parametrize("spec", [
    default_spec(3, 3, J=0.07),
    ModelSpec(TriangularLattice(2, 2), "triangular", R=2.0),
    default_spec(variant="quantum_double", group=build_group("S3", [1, 4])),
])
def test_render_roundtrip(spec):
    back = parse_config(render_config(spec))
    assert fingerprint(build_model(back)) == fingerprint(build_model(spec))


@pytest.mark.parametrize("text", [
    "[lattice]\nkind = hex\n",
    "[model]\nvariant = toric\nflavour = mild\n",
    "[extras]\nx = 1\n",
    "[couplings]\nU = -1\n",
    "[couplings]\nU = one\n",
    "[group]\ngenerators = 1\n",
    "[model]\nvariant = quantum_double\n[group]\npreset = S3\ngenerators = 1\n",
    "not an ini file",
])
def test_rejects_bad_configs(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "nope.ini")
