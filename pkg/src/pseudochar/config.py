"""Experiment configuration: a small JSON schema with field diagnostics.

A config is a JSON object. Every key is optional::

    {
      "group": {"oracle": "free", "rank": 2},
      "pseudochar": {"kind": "homomorphism", "values": {"a": 1, "b": 0}},
      "radius": 4, "radii": [4, 6], "scale_radius": 3, "R": 0,
      "graph": {"path": 10}, "basepoint": 0, "delta": null,
      "x": {"tree_radius": 3, "g_radius": 4, "h_radius": 3, "ambient_radius": 10},
      "farey": {"Q": [10, 20, 40], "window": [0, 1], "base": "1/0", "length": 6},
      "seed": 0, "output": "run"
    }

Group oracles: free, free_abelian (with ``rank`` and optional ``names``),
psl2z, cyclic (``order``), symmetric (``degree``), z2_triangular.
Pseudocharacters: homomorphism (``values``), brooks (``word``), homogenized
(``base`` and optional ``doublings``, null for the exact limit), table
(``values`` keyed by words, optional ``defect``).
Graphs: inline ``{"vertices", "edges"}``, a builder (``path``, ``cycle``,
``complete``, ``star: [legs, length]``, ``random_tree`` with ``chords`` and
``seed``), or a path to a JSON or DOT file.
"""
from __future__ import annotations

import hashlib
import json
import re
from dataclasses import asdict, dataclass, field, fields
from fractions import Fraction
from importlib import resources
from pathlib import Path

from . import __version__
from .errors import AlphabetError

BUNDLED = ("f2_ends", "f2_brooks", "p10", "z_x", "farey", "tree_chords")


class ConfigError(ValueError):
    """Bad config; carries the offending field and, when known, its line."""

    def __init__(self, message, field=None, line=None, source=None):
        self.field, self.line, self.source = field, line, source
        where = source or "config"
        if line is not None:
            where += f":{line}"
        if field:
            where += f": field '{field}'"
        super().__init__(f"{where}: {message}")


@dataclass
class ExperimentConfig:
    group: dict = field(default_factory=lambda: {"oracle": "free", "rank": 2})
    pseudochar: dict = field(default_factory=lambda: {"kind": "homomorphism", "values": {"a": 1}})
    radius: int = 4
    radii: list = field(default_factory=list)
    scale_radius: int = 3
    R: int = 0
    graph: object = None
    basepoint: object = None
    delta: object = None
    x: dict = field(default_factory=dict)
    farey: dict = field(default_factory=dict)
    seed: int = 0
    output: str = "run"
    source: str | None = field(default=None, compare=False, repr=False)

    # -- (de)serialization --------------------------------------------------

    @classmethod
    def from_dict(cls, data: dict, source: str | None = None, text: str | None = None):
        if not isinstance(data, dict):
            raise ConfigError("top level must be a JSON object", source=source)
        known = {f.name for f in fields(cls)} - {"source"}
        for k in data:
            if k not in known:
                raise ConfigError(f"unknown key (expected one of {sorted(known)})", k, _line_of(text, k), source)
        cfg = cls(**data, source=source)
        cfg.validate(text)
        return cfg

    @classmethod
    def loads(cls, text: str, source: str | None = None):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigError(f"invalid JSON: {e.msg} (column {e.colno})", line=e.lineno, source=source) from None
        return cls.from_dict(data, source, text)

    @classmethod
    def load(cls, name_or_path: str):
        """A file path, or the name of a bundled config."""
        p = Path(name_or_path)
        if p.exists():
            return cls.loads(p.read_text(), str(p))
        stem = name_or_path[:-5] if name_or_path.endswith(".json") else name_or_path
        if stem in BUNDLED:
            text = resources.files("pseudochar").joinpath(f"data/{stem}.json").read_text()
            return cls.loads(text, f"<bundled {stem}>")
        raise ConfigError(f"no such file or bundled config (bundled: {', '.join(BUNDLED)})", source=name_or_path)

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("source")
        return d

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    def hash(self) -> str:
        return hashlib.sha256(self.dumps().encode()).hexdigest()[:16]

    def meta(self, command: str) -> dict:
        return {"version": __version__, "config_hash": self.hash(), "command": command}

    # -- validation ---------------------------------------------------------

    def validate(self, text: str | None = None):
        def fail(msg, name):
            raise ConfigError(msg, name, _line_of(text, name.split(".")[-1]), self.source)

        for name in ("radius", "scale_radius"):
            v = getattr(self, name)
            if not isinstance(v, int) or isinstance(v, bool) or v <= 0:
                fail("must be a positive integer", name)
        if not isinstance(self.R, int) or self.R < 0:
            fail("must be a nonnegative integer", "R")
        if not isinstance(self.radii, list) or any(not isinstance(r, int) or r <= 0 for r in self.radii):
            fail("must be a list of positive integers", "radii")
        for k, v in self.x.items():
            if k not in ("tree_radius", "g_radius", "h_radius", "ambient_radius", "track_radius"):
                fail("unknown X parameter", f"x.{k}")
            if not isinstance(v, int) or v <= 0:
                fail("must be a positive integer", f"x.{k}")
        for k in self.farey:
            if k not in ("Q", "window", "base", "length", "word_length_max"):
                fail("unknown Farey parameter", f"farey.{k}")
        Qs = self.farey.get("Q", [1])
        Qs = Qs if isinstance(Qs, list) else [Qs]
        if any(not isinstance(q, int) or q < 1 for q in Qs):
            fail("denominator bounds must be positive integers", "farey.Q")
        if self.delta is not None:
            try:
                if Fraction(str(self.delta)) <= 0:
                    raise ValueError
            except ValueError:
                fail("must be a positive number", "delta")
        try:
            oracle = self.oracle()
        except ConfigError:
            raise
        except (ValueError, TypeError, KeyError) as e:
            fail(str(e), "group")
        try:
            self.quasicharacter(oracle)
        except ConfigError:
            raise
        except (AlphabetError, KeyError) as e:
            fail(f"references a generator the group does not have: {e}", "pseudochar")
        except (ValueError, TypeError) as e:
            fail(str(e), "pseudochar")

    # -- builders -----------------------------------------------------------

    def oracle(self):
        from . import groups
        g = dict(self.group)
        kind = g.pop("oracle", None)
        names = g.pop("names", None)
        if kind in ("free", "free_abelian"):
            rank = g.pop("rank", None)
            if not isinstance(rank, int) or rank < 1:
                raise ConfigError("rank must be a positive integer", "group.rank", source=self.source)
            build = groups.free_group if kind == "free" else groups.free_abelian_group
            out = build(rank, names)
        elif kind == "psl2z":
            out = groups.psl2z()
        elif kind == "cyclic":
            out = groups.cyclic_group(_pos(g.pop("order", None), "group.order", self.source))
        elif kind == "symmetric":
            n = _pos(g.pop("degree", None), "group.degree", self.source)
            table, perms = groups.symmetric_group_table(n)
            idx = {p: i for i, p in enumerate(perms)}
            gens = {"s": idx[(1, 0) + tuple(range(2, n))]}
            if n > 2:
                gens["t"] = idx[tuple(range(1, n)) + (0,)]
            out = groups.finite_group(table, gens)
        elif kind == "z2_triangular":
            out = groups.z2_triangular()[0]
        else:
            raise ConfigError(f"unknown oracle {kind!r}", "group.oracle", source=self.source)
        if g:
            raise ConfigError(f"unexpected keys {sorted(g)}", "group", source=self.source)
        return out

    def presentation(self):
        if self.group.get("oracle") == "z2_triangular":
            from .groups import z2_triangular
            return z2_triangular()[1]
        return None

    def quasicharacter(self, oracle=None):
        return build_quasicharacter(self.pseudochar, oracle or self.oracle(), self.source)

    def metric_graph(self):
        from .bottleneck import MetricGraph, complete_graph, cycle_graph, path_graph, star_graph
        spec = self.graph
        if spec is None:
            raise ConfigError("no graph given (use 'graph' or --graph)", "graph", source=self.source)
        if isinstance(spec, str):
            p = Path(spec)
            # relative paths: the working directory first, then next to the config file
            if not p.exists() and not p.is_absolute() and self.source and Path(self.source).exists():
                p = Path(self.source).parent / p
            if not p.exists():
                raise ConfigError(f"graph file {spec} not found", "graph", source=self.source)
            text = p.read_text()
            return MetricGraph.from_dot(text) if p.suffix == ".dot" else MetricGraph.from_json(text)
        if "edges" in spec:
            return MetricGraph.from_json(spec)
        builders = {"path": path_graph, "cycle": cycle_graph, "complete": complete_graph}
        for k, b in builders.items():
            if k in spec:
                return b(_pos(spec[k], f"graph.{k}", self.source))
        if "star" in spec:
            legs, length = spec["star"]
            return star_graph(legs, length)
        if "random_tree" in spec:
            from .treeapprox import random_tree, tree_with_chords
            n = _pos(spec["random_tree"], "graph.random_tree", self.source)
            seed = spec.get("seed", self.seed)
            chords = spec.get("chords", 0)
            return tree_with_chords(n, chords, seed) if chords else random_tree(n, seed)
        raise ConfigError("unrecognized graph description", "graph", source=self.source)


def build_quasicharacter(spec: dict, oracle, source=None):
    from .quasichar import BrooksCounting, FunctionQuasicharacter, Homogenized, Homomorphism
    if not isinstance(spec, dict):
        raise ConfigError("must be an object", "pseudochar", source=source)
    kind = spec.get("kind")
    if kind == "homomorphism":
        return Homomorphism(oracle, {k: Fraction(str(v)) for k, v in spec.get("values", {}).items()})
    if kind == "brooks":
        return BrooksCounting(oracle, spec["word"])
    if kind == "homogenized":
        base = build_quasicharacter(spec["base"], oracle, source)
        return Homogenized(base, spec.get("doublings", 12))
    if kind == "table":
        return FunctionQuasicharacter(oracle, {k: Fraction(str(v)) for k, v in spec["values"].items()},
                                      declared_defect=spec.get("defect"))
    raise ConfigError(f"unknown pseudocharacter kind {kind!r}", "pseudochar.kind", source=source)


def _pos(v, name, source):
    if not isinstance(v, int) or v < 1:
        raise ConfigError("must be a positive integer", name, source=source)
    return v


def _line_of(text: str | None, key: str):
    if not text:
        return None
    pat = re.compile(r'"' + re.escape(key) + r'"\s*:')
    for n, line in enumerate(text.splitlines(), 1):
        if pat.search(line):
            return n
    return None
