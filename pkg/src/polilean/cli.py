"""Command-line entry point: ``polilean <command> ...``.

Exit codes: 0 success, 2 usage or configuration error, 3 data error,
4 numeric failure.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__, classify, graph as gmod, synth
from ._accel import default_threads
from .config import apply_overrides, build, csv_list, read_config, synth_config
from .dimred import ReductionConfig, reduce_embedding
from .embedding import EmbeddingMatrix, read_embedding, write_embedding
from .errors import ConfigError, DataError, NumericError, PolileanError
from .evaluation import Scenario, run_scenario
from .layout import Fa2Config, fa2_layout
from .manifest import RunManifest, sha256_file
from .relational import RelationalConfig, train_relational
from .svg import confusion_svg, scatter_svg
from .walks import SkipGramConfig, WalkConfig, embed_walks

log = logging.getLogger("polilean")

METHODS = ("re", "deepwalk", "node2vec", "fa2")
DEFAULT_SCENARIOS = "loo,kshot:1,kshot:3,tier:supporter,tier:sympathizer"


# ----------------------------------------------------------------------
# stages (also used by ``pipeline``)


def embed_graph(graph, method: str, sections: dict, seed: int | None = None,
                threads: int = 1) -> EmbeddingMatrix:
    """Dispatch to an embedding method with config sections layered over defaults."""
    seeded = {} if seed is None else {"seed": str(seed)}
    if method in ("deepwalk", "node2vec"):
        walk_defaults = {"p": "1.0", "q": "1.0" if method == "deepwalk" else "0.5"}
        walk_vals = {**walk_defaults, **sections.get("walks", {}), **seeded}
        if method == "deepwalk":
            walk_vals.update(p="1.0", q="1.0")
        wcfg = build(WalkConfig, walk_vals, "walks").validate()
        scfg = build(SkipGramConfig, {**sections.get("skipgram", {}), **seeded}, "skipgram").validate()
        tag = "deepwalk" if wcfg.p == 1.0 and wcfg.q == 1.0 else "node2vec"
        return embed_walks(graph, wcfg, scfg, tag, threads)
    if method == "re":
        cfg = build(RelationalConfig, {**sections.get("relational", {}), **seeded}, "relational")
        return train_relational(graph, cfg.validate(), threads)
    if method == "fa2":
        cfg = build(Fa2Config, {**sections.get("fa2", {}), **seeded}, "fa2")
        return fa2_layout(graph, cfg.validate())
    raise ConfigError(f"unknown method {method!r}; expected one of {', '.join(METHODS)}")


def restrict(emb: EmbeddingMatrix, labels, region: str | None, tiers) -> EmbeddingMatrix:
    ids = set()
    for t in tiers:
        ids.update(labels.users(region, t))
    return emb.subset(np.array(sorted(ids), dtype=np.uint64))


def scenario_tiers(sc: Scenario) -> list[str]:
    return ["member"] if sc.kind != "tier" else ["member", sc.test_tier.value]


def write_report(rep, out_dir: Path, manifest: RunManifest, tag: str | None = None) -> None:
    tag = tag or rep.scenario.replace(":", "-")
    files = {
        out_dir / f"report-{tag}.txt": rep.to_text(),
        out_dir / f"report-{tag}.json": rep.to_json() + "\n",
        out_dir / f"confusion-{tag}.svg": confusion_svg(rep.confusion, rep.class_names,
                                                        f"{rep.classifier} {rep.scenario}"),
    }
    for path, text in files.items():
        path.write_text(text, encoding="utf-8")
        manifest.add_artifact(path)


def plot_embedding(emb: EmbeddingMatrix, labels, region: str | None, tier: str, title: str) -> str:
    if emb.dim != 2:
        raise DataError(f"plot needs a 2-D embedding, got dim={emb.dim}; run `polilean reduce` first")
    region = region or labels.region_of(emb.ids)
    ids = [u for u in labels.users(region, tier) if emb.rows([u])[0] >= 0]
    pts = emb.lookup(np.array(ids, dtype=np.uint64)) if ids else np.zeros((0, 2))
    groups = [labels.assignments[u].party for u in ids]
    return scatter_svg(pts, groups, labels.parties(region), labels.colors(region), title)


# ----------------------------------------------------------------------
# commands


def _sections(args) -> dict:
    secs = read_config(args.config) if getattr(args, "config", None) else {}
    return apply_overrides(secs, getattr(args, "set", None))


def _threads(args) -> int:
    return 1 if args.deterministic else (args.threads or default_threads())


def _manifest(args, root: Path, sections: dict, **seeds) -> RunManifest:
    return RunManifest(command=["polilean"] + list(args.argv), config=sections,
                       seeds={k: v for k, v in seeds.items() if v is not None},
                       root=root)


def _file_manifest_path(out: Path) -> Path:
    return out.with_name(out.name + ".manifest.json")


def write_synth(regions, out: Path, manifest: RunManifest) -> None:
    for r in regions:
        d = out / r.name
        d.mkdir(parents=True, exist_ok=True)
        gmod.export_edges(r.graph, d / "edges.tsv")
        gmod.write_labels(r.labels, d / "labels.tsv")
        gmod.write_catalog(r.labels.catalog, d / "catalog.tsv")
        for f in ("edges.tsv", "labels.tsv", "catalog.tsv"):
            manifest.add_artifact(d / f)


def cmd_synth(args) -> int:
    sections = _sections(args)
    if args.preset:
        sections.setdefault("synth", {})["preset"] = args.preset
    if "synth" not in sections:
        raise ConfigError("synth needs --config with a [synth] section or --preset")
    if args.seed is not None:
        sections["synth"]["seed"] = str(args.seed)
    cfg = synth_config(sections)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    m = _manifest(args, out, sections, synth=cfg.seed)
    if args.config:
        m.add_input(args.config)
    with m.stage("synth"):
        regions = synth.generate(cfg)
    with m.stage("write"):
        write_synth(regions, out, m)
    m.write()
    for r in regions:
        print(f"{r.name}\t" + "\t".join(map(str, r.graph.stats())))
    return 0


def cmd_ingest(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    m = _manifest(args, out, {})
    with m.stage("ingest"):
        g = gmod.ingest_edges(args.edges, args.format)
        labels = gmod.ingest_labels(args.labels, args.catalog) if args.labels else None
    m.add_input(args.edges)
    gmod.export_edges(g, out / "edges.tsv")
    gmod.write_idmap(g, out / "idmap.tsv")
    m.add_artifact(out / "edges.tsv")
    m.add_artifact(out / "idmap.tsv")
    if labels is not None:
        m.add_input(args.labels)
        gmod.write_labels(labels, out / "labels.tsv")
        gmod.write_catalog(labels.catalog, out / "catalog.tsv")
        m.add_artifact(out / "labels.tsv")
        m.add_artifact(out / "catalog.tsv")
    m.write()
    print("\t".join(map(str, g.stats())))
    return 0


def cmd_stats(args) -> int:
    g = gmod.ingest_edges(args.edges, args.format)
    print("\t".join(map(str, g.stats())))
    return 0


def cmd_embed(args) -> int:
    sections = _sections(args)
    if args.dim is not None:
        for s in ("skipgram", "relational"):
            sections.setdefault(s, {})["dim"] = str(args.dim)
    if args.binary_edges:
        sections.setdefault("walks", {})["binary_edges"] = "true"
    if args.dedup:
        sections.setdefault("relational", {})["dedup"] = "true"
    for key in ("p", "q"):
        if getattr(args, key) is not None:
            sections.setdefault("walks", {})[key] = str(getattr(args, key))
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    m = _manifest(args, out.parent, sections, embed=args.seed)
    m.add_input(args.edges)
    with m.stage("ingest"):
        g = gmod.ingest_edges(args.edges, args.format)
    if g.n_users == 0:
        raise DataError(f"{args.edges}: no edges to embed")
    with m.stage("embed"):
        emb = embed_graph(g, args.method, sections, args.seed, _threads(args))
    write_embedding(emb, out)
    m.add_artifact(out)
    m.write(_file_manifest_path(out))
    return 0


def cmd_reduce(args) -> int:
    sections = _sections(args)
    vals = dict(sections.get("reduce", {}))
    vals["method"] = args.method
    for key in ("perplexity", "iterations", "seed"):
        if getattr(args, key) is not None:
            vals[key] = str(getattr(args, key))
    cfg = build(ReductionConfig, vals, "reduce").validate()
    emb = read_embedding(args.embedding)
    if args.labels:
        labels = gmod.ingest_labels(args.labels, args.catalog)
        emb = restrict(emb, labels, args.region, csv_list(args.tiers, ["member"]))
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    m = _manifest(args, out.parent, sections, reduce=cfg.seed)
    m.add_input(args.embedding)
    with m.stage("reduce"):
        red = reduce_embedding(emb, cfg)
    red.meta["parent_sha256"] = sha256_file(args.embedding)
    write_embedding(red, out)
    m.add_artifact(out)
    m.write(_file_manifest_path(out))
    return 0


def cmd_eval(args) -> int:
    sections = _sections(args)
    emb = read_embedding(args.embedding)
    labels = gmod.ingest_labels(args.labels, args.catalog)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    m = _manifest(args, out, sections, eval=args.seed)
    m.add_input(args.embedding)
    m.add_input(args.labels)
    classify.resolve_kind(args.classifier)
    for text in args.scenario or ["loo"]:
        sc = Scenario.parse(text, args.reps)
        with m.stage(str(sc)):
            rep = run_scenario(sc, emb, labels, args.classifier, args.region, seed=args.seed)
        write_report(rep, out, m)
        print(f"{rep.scenario}\t{rep.classifier}\t{rep.macro_f1:.4f}")
    m.write()
    return 0


def cmd_plot(args) -> int:
    emb = read_embedding(args.embedding)
    labels = gmod.ingest_labels(args.labels, args.catalog)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    text = plot_embedding(emb, labels, args.region, args.tier, args.title or f"{emb.method} {args.tier}")
    out.write_text(text, encoding="utf-8")
    m = _manifest(args, out.parent, {})
    m.add_input(args.embedding)
    m.add_artifact(out)
    m.write(_file_manifest_path(out))
    return 0


def cmd_pipeline(args) -> int:
    """synth (or given data) -> embed -> eval -> reduce -> plot, per region."""
    sections = _sections(args)
    pipe = sections.get("pipeline", {})
    seed = args.seed if args.seed is not None else int(pipe.get("seed", "42"))
    methods = csv_list(pipe.get("methods"), list(METHODS))
    for meth in methods:
        if meth not in METHODS:
            raise ConfigError(f"unknown method {meth!r}; expected one of {', '.join(METHODS)}")
    scenarios = [Scenario.parse(s, int(pipe.get("reps", "20"))) for s in csv_list(pipe.get("scenarios"), DEFAULT_SCENARIOS.split(","))]
    classifiers = csv_list(pipe.get("classifiers"), ["logreg"])
    for c in classifiers:
        classify.resolve_kind(c)
    kshot_reduce = pipe.get("kshot_reduce", "tsne")
    plot_reduce = pipe.get("plot_reduce", "tsne")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    m = _manifest(args, out, sections, pipeline=seed)
    if args.config:
        m.add_input(args.config)
    threads = _threads(args)

    if "synth" in sections:
        sections["synth"].setdefault("seed", str(seed))
        with m.stage("synth"):
            regions = synth.generate(synth_config(sections))
        write_synth(regions, out / "data", m)
        data = [(r.name, r.graph, r.labels) for r in regions]
    elif "data" in sections:
        d = sections["data"]
        g = gmod.ingest_edges(d["edges"], d.get("format", "auto"))
        labels = gmod.ingest_labels(d["labels"], d.get("catalog"))
        data = [(labels.region_of(g.users), g, labels)]
    else:
        raise ConfigError("pipeline config needs a [synth] or [data] section")

    red_vals = dict(sections.get("reduce", {}))
    summary = []
    for name, g, labels in data:
        rdir = out / name
        rdir.mkdir(parents=True, exist_ok=True)
        for meth in methods:
            with m.stage(f"{name}.embed.{meth}"):
                emb = embed_graph(g, meth, sections, seed, threads)
            path = rdir / f"{meth}.emb.tsv"
            write_embedding(emb, path)
            m.add_artifact(path)
            for sc in scenarios:
                feats = emb
                tag = str(sc).replace(":", "-")
                if sc.kind == "kshot" and kshot_reduce != "none" and emb.dim > 2:
                    cfg = build(ReductionConfig, {**red_vals, "method": kshot_reduce, "seed": str(seed)}, "reduce")
                    with m.stage(f"{name}.reduce.{meth}.{tag}"):
                        feats = reduce_embedding(restrict(emb, labels, name, scenario_tiers(sc)), cfg)
                    tag += f"-{kshot_reduce}"
                for clf in classifiers:
                    with m.stage(f"{name}.eval.{meth}.{tag}.{clf}"):
                        rep = run_scenario(sc, feats, labels, clf, name, seed=seed)
                    write_report(rep, rdir, m, f"{meth}-{tag}-{clf}")
                    summary.append(f"{name}\t{meth}\t{tag}\t{clf}\t{rep.macro_f1:.4f}")
            if plot_reduce != "none":
                members = restrict(emb, labels, name, ["member"])
                if members.dim > 2:
                    cfg = build(ReductionConfig, {**red_vals, "method": plot_reduce, "seed": str(seed)}, "reduce")
                    with m.stage(f"{name}.reduce.{meth}.plot"):
                        members = reduce_embedding(members, cfg)
                svg_path = rdir / f"{meth}-members.svg"
                svg_path.write_text(plot_embedding(members, labels, name, "member", f"{name} {meth}"), encoding="utf-8")
                m.add_artifact(svg_path)
    (out / "summary.tsv").write_text("region\tmethod\tscenario\tclassifier\tmacro_f1\n"
                                     + "\n".join(summary) + "\n", encoding="utf-8")
    m.add_artifact(out / "summary.tsv")
    m.write()
    print("\n".join(summary))
    return 0


# ----------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--threads", type=int, default=None,
                        help="worker cap (default: $POLILEAN_THREADS or CPU count)")
    common.add_argument("--deterministic", action="store_true",
                        help="single-worker numeric paths for bit-identical outputs")
    common.add_argument("-v", "--verbose", action="count", default=0)

    p = argparse.ArgumentParser(prog="polilean", description="Political leaning from retweet graphs.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def cmd(name, fn, help_):
        sp = sub.add_parser(name, parents=[common], help=help_)
        sp.set_defaults(func=fn)
        return sp

    def cfg_opts(sp):
        sp.add_argument("--config", help="INI config file")
        sp.add_argument("--set", action="append", metavar="SECTION.KEY=VALUE", help="config override")

    sp = cmd("synth", cmd_synth, "generate synthetic tiered retweet graphs")
    cfg_opts(sp)
    sp.add_argument("--preset", choices=sorted(synth.PRESETS))
    sp.add_argument("--seed", type=int)
    sp.add_argument("--out", required=True)

    sp = cmd("ingest", cmd_ingest, "normalise an edge list (and labels)")
    sp.add_argument("--edges", required=True)
    sp.add_argument("--format", default="auto", choices=gmod.EDGE_FORMATS)
    sp.add_argument("--labels")
    sp.add_argument("--catalog")
    sp.add_argument("--out", required=True)

    sp = cmd("stats", cmd_stats, "print users, edges and retweets")
    sp.add_argument("--edges", required=True)
    sp.add_argument("--format", default="auto", choices=gmod.EDGE_FORMATS)

    sp = cmd("embed", cmd_embed, "learn user representations")
    cfg_opts(sp)
    sp.add_argument("--edges", required=True)
    sp.add_argument("--format", default="auto", choices=gmod.EDGE_FORMATS)
    sp.add_argument("--method", required=True, choices=METHODS)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--dim", type=int)
    sp.add_argument("--p", type=float)
    sp.add_argument("--q", type=float)
    sp.add_argument("--binary-edges", action="store_true")
    sp.add_argument("--dedup", action="store_true")
    sp.add_argument("--out", required=True)

    sp = cmd("reduce", cmd_reduce, "PCA or t-SNE to two dimensions")
    cfg_opts(sp)
    sp.add_argument("--embedding", required=True)
    sp.add_argument("--method", required=True, choices=("pca", "tsne"))
    sp.add_argument("--labels", help="restrict to labelled users of --tiers")
    sp.add_argument("--catalog")
    sp.add_argument("--region")
    sp.add_argument("--tiers", default="member")
    sp.add_argument("--perplexity", type=float)
    sp.add_argument("--iterations", type=int)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--out", required=True)

    sp = cmd("eval", cmd_eval, "run evaluation scenarios")
    cfg_opts(sp)
    sp.add_argument("--embedding", required=True)
    sp.add_argument("--labels", required=True)
    sp.add_argument("--catalog")
    sp.add_argument("--region")
    sp.add_argument("--scenario", action="append", help="loo, kshot:<k> or tier:<supporter|sympathizer>")
    sp.add_argument("--classifier", default="logreg")
    sp.add_argument("--reps", type=int, default=20)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", required=True)

    sp = cmd("plot", cmd_plot, "SVG scatter of a 2-D embedding")
    sp.add_argument("--embedding", required=True)
    sp.add_argument("--labels", required=True)
    sp.add_argument("--catalog")
    sp.add_argument("--region")
    sp.add_argument("--tier", default="member")
    sp.add_argument("--title")
    sp.add_argument("--out", required=True)

    sp = cmd("pipeline", cmd_pipeline, "end-to-end run from one config file")
    cfg_opts(sp)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--out", required=True)
    return p


EXIT = ((ConfigError, 2), (DataError, 3), (NumericError, 4), (PolileanError, 1))


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    args.argv = argv
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    if args.deterministic:
        os.environ["POLILEAN_THREADS"] = "1"
    try:
        return args.func(args)
    except PolileanError as exc:
        print(f"polilean: error: {exc}", file=sys.stderr)
        return next(code for cls, code in EXIT if isinstance(exc, cls))
    except OSError as exc:
        print(f"polilean: error: {exc}", file=sys.stderr)
        return 3
    except FloatingPointError as exc:
        print(f"polilean: numeric failure: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
