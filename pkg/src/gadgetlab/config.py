"""Model configuration files.

INI-style text read with :mod:`configparser`::

    [lattice]
    kind = square            ; square | triangular
    Lx = 2
    Ly = 2
    periodic = yes           ; open patches only for square

    [model]
    variant = toric          ; toric | quantum_double | triangular
    qd_shield = same         ; same | vertical-inverse (quantum double only)

    [couplings]
    U = 1
    t = 0.375
    J = 0.09
    R = 2                    ; triangular only

    [group]                  ; quantum double only
    preset = S3              ; or: table = 0 1 / 1 0   (rows separated by '/')
    generators = 1, 4

    [logicals]
    row = 0
    col = 0

Unknown sections or keys are rejected so typos do not pass silently.
"""

from __future__ import annotations

import configparser
from pathlib import Path

from .groups import GroupError, build_group
from .lattice import LatticeError, build_lattice
from .model import ModelError, ModelSpec

KNOWN = {
    "lattice": {"kind", "lx", "ly", "periodic"},
    "model": {"variant", "qd_shield"},
    "couplings": {"u", "t", "j", "r"},
    "group": {"preset", "table", "generators", "name"},
    "logicals": {"row", "col"},
}


class ConfigError(ValueError):
    pass


def _int_list(text: str) -> list[int]:
    return [int(v) for v in text.replace(",", " ").split()]


def parse_config(text: str) -> ModelSpec:
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    for sec in cp.sections():
        if sec not in KNOWN:
            raise ConfigError(f"unknown section [{sec}]")
        extra = set(cp[sec]) - KNOWN[sec]
        if extra:
            raise ConfigError(f"unknown key(s) in [{sec}]: {', '.join(sorted(extra))}")
    try:
        lat = cp["lattice"] if cp.has_section("lattice") else {}
        lattice = build_lattice(lat.get("kind", "square"), int(lat.get("lx", 2)), int(lat.get("ly", 2)),
                                cp.getboolean("lattice", "periodic", fallback=True))
        mod = cp["model"] if cp.has_section("model") else {}
        variant = mod.get("variant", "triangular" if lattice.kind == "triangular" else "toric")
        cpl = cp["couplings"] if cp.has_section("couplings") else {}
        kw = {"U": float(cpl.get("u", 1.0)), "t": float(cpl.get("t", 0.375)), "J": float(cpl.get("j", 0.09))}
        if "r" in cpl:
            kw["R"] = float(cpl["r"])
        group = None
        if cp.has_section("group"):
            g = cp["group"]
            gens = _int_list(g["generators"]) if "generators" in g else None
            if "table" in g:
                table = [_int_list(row) for row in g["table"].split("/")]
                group = build_group({"table": table, "generators": gens, "name": g.get("name", "custom")})
            elif "preset" in g:
                group = build_group(g["preset"], gens)
            else:
                raise ConfigError("[group] needs preset or table")
        logi = cp["logicals"] if cp.has_section("logicals") else {}
        return ModelSpec(lattice, variant, group=group, logical_row=int(logi.get("row", 0)),
                         logical_col=int(logi.get("col", 0)), qd_shield=mod.get("qd_shield", "same"), **kw)
    except ConfigError:
        raise
    except (ValueError, KeyError, LatticeError, GroupError, ModelError) as exc:
        raise ConfigError(f"invalid config: {exc}") from None


def load_config(path) -> ModelSpec:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config(text)


def render_config(spec: ModelSpec) -> str:
    """Config text that parses back to an equivalent spec (embedded in reports)."""
    L = spec.lattice
    lines = ["[lattice]", f"kind = {L.kind}", f"Lx = {L.Lx}", f"Ly = {L.Ly}",
             f"periodic = {'yes' if L.periodic else 'no'}", "", "[model]", f"variant = {spec.variant}"]
    if spec.variant == "quantum_double":
        lines.append(f"qd_shield = {spec.qd_shield}")
    lines += ["", "[couplings]", f"U = {spec.U!r}", f"t = {spec.t!r}", f"J = {spec.J!r}"]
    if spec.R is not None:
        lines.append(f"R = {spec.R!r}")
    if spec.group is not None:
        G = spec.group
        lines += ["", "[group]", f"name = {G.name}",
                  "table = " + " / ".join(" ".join(str(int(v)) for v in row) for row in G.mult),
                  "generators = " + ", ".join(str(int(g)) for g in G.generators)]
    lines += ["", "[logicals]", f"row = {spec.logical_row}", f"col = {spec.logical_col}", ""]
    return "\n".join(lines)
