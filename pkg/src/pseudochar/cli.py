"""Command-line front end.

Every run writes its artifacts (JSON, DOT, CSV) into one output directory
and prints a short summary. JSON files carry a ``meta`` block with the
package version and the hash of the effective config; DOT and CSV files
start with a comment line holding the same. Nothing time-dependent is
written, so repeating a run reproduces its files byte for byte.

Exit status: 0 on success, 1 for a domain error (failed precondition,
exceeded budget, disconnected graph), 2 for usage and config errors.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from fractions import Fraction
from pathlib import Path

from . import __version__
from .config import ConfigError, ExperimentConfig
from .errors import ConsistencyError, DegenerateInput, PreconditionError, ResourceError

THREADS_ENV = "PSEUDOCHAR_THREADS"


def jsonable(x):
    if isinstance(x, Fraction):
        return str(x) if x.denominator != 1 else x.numerator
    if isinstance(x, dict):
        return {str(k) if not isinstance(k, str) else k: jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if hasattr(x, "item") and not isinstance(x, (str, bytes)):
        return x.item()
    return x


class Run:
    """Output directory plus the provenance stamped into each file."""

    def __init__(self, cfg: ExperimentConfig, command: str, out: Path, threads: int):
        self.cfg, self.command, self.out, self.threads = cfg, command, out, threads
        self.meta = cfg.meta(command)
        self.files: list[str] = []
        self.summary: dict = {}
        out.mkdir(parents=True, exist_ok=True)

    def _write(self, name, text):
        (self.out / name).write_text(text)
        self.files.append(name)

    def json(self, name, payload):
        body = {"meta": self.meta, "result": jsonable(payload)}
        self._write(name, json.dumps(body, indent=1, sort_keys=True) + "\n")

    def dot(self, name, text):
        self._write(name, f"// pseudochar {__version__} config {self.meta['config_hash']}\n{text}\n")

    def csv(self, name, header, rows):
        buf = io.StringIO()
        buf.write(f"# pseudochar {__version__} config {self.meta['config_hash']}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([str(v) for v in r])
        self._write(name, buf.getvalue())

    def finish(self):
        summary = {"command": self.command, "threads": self.threads, **self.summary,
                   "files": sorted(self.files) + ["summary.json"]}
        self.json("summary.json", summary)
        print(f"pseudochar {__version__} {self.command} config {self.meta['config_hash']}")
        for k, v in self.summary.items():
            print(f"  {k}: {json.dumps(jsonable(v))}")
        print(f"  output: {self.out}")


# -- commands -------------------------------------------------------------------

def _scaled(cfg: ExperimentConfig, oracle):
    from .quasichar import scale_normalize
    return scale_normalize(cfg.quasicharacter(oracle), oracle, cfg.scale_radius)


def cmd_pseudochar(run: Run, args):
    from .groups import cayley_ball
    cfg = run.cfg
    oracle = cfg.oracle()
    f = _scaled(cfg, oracle)
    ball = cayley_ball(oracle, cfg.radius)
    rows = [(oracle.format(w), f.base.value(x), f.value(x)) for w, x in zip(ball.words, ball.elements)]
    run.csv("values.csv", ["word", "value", "scaled"], rows)
    info = {"spec": f.base.spec(), "scale": f.scale, "defect_estimate": f.defect,
            "epsilon": f.epsilon, "checked_radius": f.ball_radius_checked, "ball_size": len(rows)}
    run.json("pseudochar.json", info)
    run.summary.update(scale=f.scale, defect_estimate=f.defect, epsilon=f.epsilon, ball_size=len(rows))


def _tree(cfg, radius=None):
    from .slabtree import slab_tree
    oracle = cfg.oracle()
    return slab_tree(oracle, _scaled(cfg, oracle), radius or cfg.radius, presentation=cfg.presentation())


def cmd_slabtree(run: Run, args):
    t = _tree(run.cfg)
    run.json("slabtree.json", t.to_json())
    run.dot("slabtree.dot", t.to_dot())
    run.summary.update(vertex_spaces=len(t.vertex_spaces), tracks=len(t.tracks), scale=t.f.scale)


def cmd_ends(run: Run, args):
    from .ends import classify_ends, pingpong_pair, separated_triple
    cfg = run.cfg
    radii = cfg.radii or [cfg.radius]
    trees = [_tree(cfg, r) for r in radii]
    rep = classify_ends(trees, cfg.R)
    if args.action == "classify":
        run.json("ends.json", rep.to_json())
        run.summary.update(classification=rep.classification, counts=list(rep.counts),
                           certified=rep.certified, radii=radii)
        return
    oracle = trees[0].ball.oracle
    triple = separated_triple(trees[0], rep, cfg.R)
    pp = pingpong_pair(trees[0], triple)
    dirs = {k: {"sign": d.sign, "component": d.component, "exit": oracle.format(d.witness)}
            for k, d in pp.directions.items()}
    cert = dict(pp.certificate, relations=[str(r) for r in pp.certificate["relations"]])
    run.json("pingpong.json", {"triple": triple.format(oracle), "g": oracle.format(pp.g),
                               "g_prime": oracle.format(pp.gp), "directions": dirs, "certificate": cert})
    run.summary.update(g=oracle.format(pp.g), g_prime=oracle.format(pp.gp),
                       words_checked=cert["words_checked"], passed=cert["passed"])


def cmd_bottleneck(run: Run, args):
    from .bottleneck import bottleneck_delta
    g = run.cfg.metric_graph()
    res = bottleneck_delta(g, per_pair=args.all_pairs)
    run.json("bottleneck.json", dict(res.to_json(), vertices=len(g), edges=len(g.edges),
                                     delta_half_edges=res.delta_half_edges))
    if args.all_pairs:
        run.csv("pairs.csv", ["x", "y", "delta", "midpoint"], sorted(res.rows(), key=lambda r: (str(r[0]), str(r[1]))))
    run.summary.update(delta=res.delta, witness_pair=res.witness_pair, vertices=len(g))


def _vertex(g, text):
    if text is None:
        return None
    for v in g.vertices:
        if str(v) == str(text):
            return v
    raise DegenerateInput(f"basepoint {text} is not a vertex")


def cmd_treeapprox(run: Run, args):
    from .treeapprox import build_tree, coarse_surjectivity_check, verify_qi
    cfg = run.cfg
    g = cfg.metric_graph()
    base = _vertex(g, cfg.basepoint)
    delta = Fraction(str(cfg.delta)) if cfg.delta is not None else None
    t = build_tree(g, base, delta)
    rows = []
    qi = verify_qi(t, g, rows=rows)
    cover = coarse_surjectivity_check(t, g, strict=False)
    run.json("gamma.json", t.to_json())
    run.dot("gamma.dot", t.to_dot())
    run.csv("qi.csv", ["x", "y", "tree_distance", "image_distance", "ok"], rows)
    run.json("verification.json", {"qi": qi.to_json(), "coarse_surjectivity": cover, "stats": t.stats})
    run.summary.update(delta=t.delta, R=t.R, tree_vertices=len(t), qi_pairs=qi.pairs,
                       qi_violations=len(qi.violations), max_cover_distance=cover)


def cmd_x(run: Run, args):
    from .xgraph import (build_X, interior_connected, verify_cobounded, verify_equivariance,
                         verify_separation_lemmas, verify_x_bottleneck)
    cfg = run.cfg
    p = dict(cfg.x)
    tree = _tree(cfg, p.pop("tree_radius", 3))
    x = build_X(tree, **p)
    run.json("x.json", x.to_json())
    run.dot("x.dot", x.to_dot())
    run.json("truncation.json", x.truncation)
    run.summary.update(vertices=len(x), edges=len(x.edges), tracks=len(x.tracks),
                       translations_skipped=x.truncation["translations_skipped"])
    if args.action != "verify":
        return
    from .groups import cayley_ball
    shifts = cayley_ball(x.oracle, 1).elements
    rep = {"interior_connected": interior_connected(x), "cobounded": verify_cobounded(x),
           "lemmas": verify_separation_lemmas(x), "equivariance": verify_equivariance(x, shifts)}
    if rep["interior_connected"]:
        res = verify_x_bottleneck(x)
        rep["bottleneck"] = res.to_json()
        run.summary["delta_X"] = res.delta
    run.json("verify.json", rep)
    run.summary.update(interior_connected=rep["interior_connected"], cobounded=rep["cobounded"],
                       lemma_violations=rep["lemmas"]["intersect_violations"] + rep["lemmas"]["separation_violations"])


def _Qs(cfg, args):
    Q = cfg.farey.get("Q", [10])
    return Q if isinstance(Q, list) else [Q]


def cmd_farey(run: Run, args):
    from . import farey
    cfg = run.cfg
    Qs = _Qs(cfg, args)
    window = tuple(cfg.farey.get("window", (0, 1)))
    if args.action == "gen":
        fg = farey.farey_graph(Qs[-1], window)
        run.json("farey.json", fg.to_json())
        run.dot("farey.dot", fg.to_dot())
        run.summary.update(Q=Qs[-1], vertices=len(fg), edges=len(fg.edges))
    elif args.action == "bottleneck":
        rep = farey.farey_bottleneck_stability(Qs, window)
        run.json("stability.json", rep)
        run.csv("stability.csv", ["Q", "vertices", "edges", "delta"],
                [(r["Q"], r["vertices"], r["edges"], r["delta"]) for r in rep["rows"]])
        run.summary.update(deltas=[r["delta"] for r in rep["rows"]], stable=rep["stable"])
    else:
        fg = farey.farey_graph(Qs[-1], window)
        base = farey.parse_vertex(args.base or cfg.farey.get("base", "1/0"))
        top = args.len if args.len is not None else cfg.farey.get("length", 6)
        rows = []
        for k in range(top + 1):
            d, r = farey.orbit_diameter(fg, base, k)
            rows.append({"length": k, "diameter": d, **r})
        run.json("orbit.json", {"Q": Qs[-1], "base": farey.fmt(base), "rows": rows})
        run.csv("orbit.csv", ["length", "diameter", "in_slice", "escaped"],
                [(r["length"], r["diameter"], r["in_slice"], r["escaped"]) for r in rows])
        run.summary.update(Q=Qs[-1], diameters=[r["diameter"] for r in rows])


COMMANDS = {
    "pseudochar": (cmd_pseudochar, ["eval"]),
    "slabtree": (cmd_slabtree, ["build"]),
    "ends": (cmd_ends, ["classify", "pingpong"]),
    "bottleneck": (cmd_bottleneck, None),
    "treeapprox": (cmd_treeapprox, ["build"]),
    "x": (cmd_x, ["build", "verify"]),
    "farey": (cmd_farey, ["gen", "bottleneck", "orbit"]),
}


def parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file or bundled config name")
    common.add_argument("--out", help="output directory (default: the config's 'output')")
    common.add_argument("--radius", type=int, help="override the ball radius")
    common.add_argument("--Q", help="Farey denominator bound(s), comma separated")
    common.add_argument("--threads", type=int,
                        help=f"worker threads (default ${THREADS_ENV} or 1); recorded in the summary")
    p = argparse.ArgumentParser(prog="pseudochar", description="Pseudocharacter and quasi-tree experiments")
    p.add_argument("--version", action="version", version=f"pseudochar {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for name, (_, actions) in COMMANDS.items():
        sp = sub.add_parser(name, parents=[common])
        if actions:
            sp.add_argument("action", nargs="?", choices=actions, default=actions[0])
        if name in ("bottleneck", "treeapprox"):
            sp.add_argument("--graph", help="graph file (JSON edge list or DOT)")
        if name == "bottleneck":
            sp.add_argument("--all-pairs", action="store_true", help="write per-pair constants as CSV")
        if name == "treeapprox":
            sp.add_argument("--basepoint")
        if name == "farey":
            sp.add_argument("--base", help="orbit base vertex, e.g. 1/0")
            sp.add_argument("--len", type=int, help="maximal word length for the orbit")
    return p


def _threads(args) -> int:
    if args.threads is not None:
        if args.threads < 1:
            raise ConfigError("must be positive", "--threads")
        return args.threads
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"${THREADS_ENV} must be an integer, got {env!r}") from None
    return 1


def overrides(cfg: ExperimentConfig, args):
    """Fold command-line overrides into the config, so the hash covers them."""
    changed = False
    if args.radius is not None:
        cfg.radius, changed = args.radius, True
    if args.Q is not None:
        try:
            Qs = [int(q) for q in str(args.Q).split(",")]
        except ValueError:
            raise ConfigError(f"expects integers, got {args.Q!r}", "--Q") from None
        cfg.farey, changed = {**cfg.farey, "Q": Qs}, True
    if getattr(args, "graph", None) is not None:
        cfg.graph, changed = args.graph, True
    if getattr(args, "basepoint", None) is not None:
        cfg.basepoint, changed = args.basepoint, True
    if changed:
        cfg.validate()


def main(argv=None) -> int:
    try:
        args = parser().parse_args(argv)
    except SystemExit as e:
        return 0 if e.code in (0, None) else 2
    try:
        cfg = ExperimentConfig.load(args.config) if args.config else ExperimentConfig()
        overrides(cfg, args)
        threads = _threads(args)
        command = args.command + (f" {args.action}" if getattr(args, "action", None) else "")
        run = Run(cfg, command, Path(args.out or cfg.output), threads)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    handler = COMMANDS[args.command][0]
    try:
        handler(run, args)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except ResourceError as e:
        print(f"error: resource budget exceeded: {e}", file=sys.stderr)
        return 1
    except (PreconditionError, DegenerateInput, ConsistencyError, ValueError) as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return 1
    run.finish()
    return 0


if __name__ == "__main__":
    sys.exit(main())
