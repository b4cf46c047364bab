"""Command-line entry point: ``lstone <command> [options]``.

Exit status is 0 on success, 1 when a verification fails (a rejected
certificate, an uncovered sequence) and 2 on usage, input or resource errors.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys

import numpy as np

from . import core, dims, online, pec, sampling, stability
from .errors import InvalidArgument, LabError, ParseError
from .learners import SOA, learner_factory

DEFAULT_SEED = 20240601


class _Fail(Exception):
    """Verification failed: print the payload and exit 1."""

    def __init__(self, payload):
        self.payload = payload


def _emit(obj, fmt="json", out=None):
    out = out or sys.stdout
    if fmt == "csv":
        rows = obj if isinstance(obj, list) else [obj]
        w = csv.DictWriter(out, fieldnames=list(rows[0]) if rows else [], lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: "" if v is None else v for k, v in r.items()})
    else:
        out.write(json.dumps(obj) + "\n")


def _read_json(path):
    with open(path, "rb") as fh:
        return fh.read()


def _class(args):
    if not args.cls:
        raise InvalidArgument("--class is required")
    return core.class_from_spec(args.cls)


def _dist(args, cls):
    if args.dist:
        return core.read_distribution(_read_json(args.dist))
    if args.target:
        h = core.as_hypothesis(tuple(int(c) for c in args.target), cls.m)
        return core.FiniteDistribution.uniform([(x, h[x]) for x in range(cls.m)])
    raise InvalidArgument("give a distribution with --dist FILE or --target BITS")


# -- commands -------------------------------------------------------------------------


def cmd_dims(args):
    cls = _class(args)
    thr = dims.threshold_dim(cls)
    if not thr.exact:
        print(f"threshold search hit its budget; {thr.k} is a lower bound", file=sys.stderr)
    _emit({"vc": dims.vc_dim(cls), "ldim": dims.ldim(cls), "threshold": thr.k}, args.format)


def _cert_kind(obj):
    if "hypothesis" in obj or "point" in obj:
        return "tree"
    if "witnesses" in obj:
        return "shattered"
    if "hypotheses" in obj and "points" in obj:
        return "half-graph"
    raise InvalidArgument("unrecognized certificate: expected a tree, half-graph or shattered set")


def cmd_certify(args):
    cls = _class(args)
    if args.cert is None:
        if args.kind == "tree":
            obj = dims.tree_to_json(dims.ldim_certificate(cls))
        elif args.kind == "half-graph":
            obj = dims.half_graph_to_json(dims.threshold_dim(cls).certificate)
        else:
            c = dims.shattered_set_certificate(cls)
            obj = {"points": list(c.points), "witnesses": [list(w) for w in c.witnesses]}
        _emit(obj)
        return
    obj = core._load_json(_read_json(args.cert), "certificate")
    kind = _cert_kind(obj)
    try:
        if kind == "tree":
            ok, msg = dims.verify_tree(dims.tree_from_json(obj), cls, strict_distinct=args.strict)
            size = dims.tree_from_json(obj).depth
        elif kind == "half-graph":
            ok, msg = dims.verify_half_graph(dims.half_graph_from_json(obj), cls)
            size = len(obj["points"])
        else:
            cert = dims.ShatteredSetCert(tuple(int(p) for p in obj["points"]),
                                         tuple(tuple(int(b) for b in w) for w in obj["witnesses"]))
            ok, msg = dims.verify_shattered(cert, cls)
            size = len(cert.points)
    except (KeyError, TypeError, ValueError) as e:
        raise ParseError(f"malformed {kind} certificate: {e}") from None
    result = {"kind": kind, "ok": ok, "size": size, "message": msg}
    if not ok:
        raise _Fail(result)
    _emit(result)


def cmd_soa(args):
    cls = _class(args)
    seq = core.read_sequence(_read_json(args.seq), cls.m)
    learner = SOA(eager=args.eager)
    res = online.run_online(learner, seq, cls, allow_unrealizable=args.allow_unrealizable)
    rows = [r.to_json() for r in res.trace]
    if args.format == "csv":
        for r in rows:
            r["hypothesis"] = "".join(map(str, r["hypothesis"]))
        _emit(rows, "csv")
    else:
        for r in rows:
            _emit(r)
    print(f"mistakes={res.mistakes} mind_changes={learner.mind_changes} ldim={dims.ldim(cls)}", file=sys.stderr)


def cmd_pec_sim(args):
    cls = _class(args)
    dist = _dist(args, cls)
    factory = learner_factory(args.learner, cls, args.budget)
    if args.trace:
        tr = pec.simulate_pec(factory(), dist, cls, args.horizon, seed=args.seed, trial=0)
        for r in tr.records():
            _emit(r)
        return
    rows = pec.pec_monte_carlo(factory, dist, cls, args.horizon, args.trials, seed=args.seed)
    if args.format == "csv":
        _emit(rows, "csv")
    else:
        mc = [r["mind_changes"] for r in rows]
        _emit({"ldim": dims.ldim(cls), "trials": args.trials, "horizon": args.horizon,
               "max_mind_changes": max(mc), "zero_terminal_loss": sum(r["terminal_loss"] == 0 for r in rows) / len(rows),
               "rows": rows})


def cmd_pec_adversary(args):
    cls = _class(args)
    factory = learner_factory(args.learner, cls, args.wrap)
    v = pec.force_mind_changes(factory, cls, args.budget, repetition_cap=args.cap, allow_shallow=True)
    out = v.to_json()
    if not args.transcript:
        out.pop("transcript")
    _emit(out)


def cmd_cover_build(args):
    cls = _class(args)
    cover = online.build_cover(cls, args.n, max_experts=args.budget or online.MAX_EXPERTS)
    _emit(cover.to_json())


def cmd_cover_verify(args):
    cls = _class(args)
    if args.cover:
        obj = core._load_json(_read_json(args.cover), "cover")
        try:
            cover = online.ExpertCover.from_json(obj, cls)
        except (KeyError, TypeError, ValueError) as e:
            raise ParseError(f"malformed cover: {e}") from None
        n = cover.n if args.n is None else args.n
    else:
        if args.n is None:
            raise InvalidArgument("give --n or a --cover file")
        n = args.n
        cover = online.build_cover(cls, n)
    rep = online.verify_cover(cls, n, cover, seed=args.seed)
    if not rep.ok:
        raise _Fail(rep.to_json())
    _emit(rep.to_json())


def cmd_alln_sim(args):
    cls = _class(args)
    adv = sampling.make_adversary(args.adversary, cls)
    sizes = [int(s) for s in str(args.n).split(",")]
    rows, summary = [], []
    d = max(dims.ldim(cls), 0)
    for n in sizes:
        disc = sampling.alln_trials(cls, adv, args.N, n, args.trials, seed=args.seed)
        rows += [{"trial": t, "n": n, "discrepancy": float(v)} for t, v in enumerate(disc)]
        q = float(np.quantile(disc, 1 - args.delta, method="inverted_cdf"))
        ref = sampling.reference_rate(d, n, args.delta, args.C)
        summary.append({"n": n, "median": float(np.median(disc)), "quantile": q, "delta": args.delta,
                        "reference": ref, "ratio": q / ref})
    if args.format == "csv":
        _emit(rows, "csv")
    else:
        _emit({"N": args.N, "adversary": args.adversary, "ldim": d, "trials": args.trials, "summary": summary})


def cmd_stability_info(args):
    cls = _class(args)
    dist = _dist(args, cls)
    factory = learner_factory(args.learner, cls, args.budget)
    mi, joint = stability.learner_mutual_information(factory, cls, dist, args.n, units=args.units)
    gap = stability.pac_bayes_gap(joint, stability.mean_posterior(joint), units=args.units)
    _emit({"samples": len(joint), "outputs": len(joint.space), "units": args.units,
           "mutual_information": mi, "pac_bayes_gap_mean_posterior": gap})


def _point_list(text, m):
    if text is None:
        return list(range(m))
    return [int(p) for p in text.split(",") if p.strip()]


def cmd_goodsets(args):
    if args.graph:
        g = stability.read_graph(args.graph)
        B = _point_list(args.points, g.n)
        rep = stability.epsilon_excellent_check(B, g, args.eps)
        out = {"B": B, "eps": args.eps, "excellent": rep.ok, "good_sets_checked": rep.checked,
               "witness": None if rep.witness is None else list(rep.witness)}
        if not rep.ok:
            raise _Fail(out)
        _emit(out)
        return
    cls = _class(args)
    Y = _point_list(args.points, cls.m)
    ok, h = stability.epsilon_good_check(Y, cls, args.eps)
    best = stability.largest_good_subset(Y, cls, args.eps, budget=args.budget or 16)
    _emit({"points": Y, "eps": args.eps, "good": ok, "violating": None if h is None else list(h),
           "largest_good_subset": list(best.points), "exact": best.exact, "exponent": best.exponent})


def cmd_generate(args):
    sys.stdout.write(core.write_class(_class(args)).decode("utf-8"))


# -- parser ---------------------------------------------------------------------------


def build_parser():
    p = argparse.ArgumentParser(prog="lstone", description="Littlestone class laboratory")
    sub = p.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--class", dest="cls", help="class file or generator name:params")
    common.add_argument("--seed", type=int, default=DEFAULT_SEED)
    common.add_argument("--format", choices=("json", "csv"), default="json")

    def add(parent, name, func, **kw):
        sp = parent.add_parser(name, parents=[common], **kw)
        sp.set_defaults(func=func)
        return sp

    add(sub, "dims", cmd_dims, help="VC, Littlestone and threshold dimensions")

    for name in ("certify", "verify"):
        sp = add(sub, name, cmd_certify, help="check a certificate (or emit one when --cert is absent)")
        sp.add_argument("--cert")
        sp.add_argument("--kind", choices=("tree", "half-graph", "shattered"), default="tree")
        sp.add_argument("--strict", action="store_true", help="tree node points must be distinct")

    sp = add(sub, "soa", cmd_soa, help="run the SOA on a labeled sequence")
    sp.add_argument("--seq", required=True)
    sp.add_argument("--eager", action="store_true")
    sp.add_argument("--allow-unrealizable", action="store_true")

    def learner_opts(sp):
        sp.add_argument("--learner", default="soa", help="soa | first | constant[:bits]")
        sp.add_argument("--dist")
        sp.add_argument("--target", help="uniform distribution over the domain labeled by these bits")

    pp = sub.add_parser("pec").add_subparsers(dest="pec_command", required=True)
    sp = add(pp, "sim", cmd_pec_sim, help="i.i.d. simulation of a learner")
    learner_opts(sp)
    sp.add_argument("--horizon", type=int, default=2000)
    sp.add_argument("--trials", type=int, default=100)
    sp.add_argument("--budget", type=int, default=None, help="wrap the learner at this many mind changes")
    sp.add_argument("--trace", action="store_true", help="emit the per-step trace of trial 0")
    sp = add(pp, "adversary", cmd_pec_adversary, help="run the mind-change adversary")
    sp.add_argument("--learner", default="soa")
    sp.add_argument("--budget", type=int, required=True)
    sp.add_argument("--wrap", type=int, default=None, help="freeze the learner after this many mind changes")
    sp.add_argument("--cap", type=int, default=pec.DEFAULT_REPETITION_CAP)
    sp.add_argument("--transcript", action="store_true")

    cp = sub.add_parser("cover").add_subparsers(dest="cover_command", required=True)
    sp = add(cp, "build", cmd_cover_build)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--budget", type=int, default=None, help="maximum number of experts")
    sp = add(cp, "verify", cmd_cover_verify)
    sp.add_argument("--n", type=int, default=None)
    sp.add_argument("--cover")

    ap = sub.add_parser("alln").add_subparsers(dest="alln_command", required=True)
    sp = add(ap, "sim", cmd_alln_sim)
    sp.add_argument("--adversary", default="iid", choices=sorted(sampling.ADVERSARIES))
    sp.add_argument("--N", type=int, default=4096)
    sp.add_argument("--n", default="100", help="sample size, or a comma-separated list")
    sp.add_argument("--trials", type=int, default=200)
    sp.add_argument("--delta", type=float, default=0.05)
    sp.add_argument("--C", type=float, default=1.0, help="display constant of the reference curve")

    def goodsets_opts(sp):
        sp.add_argument("--eps", type=float, required=True)
        sp.add_argument("--points", help="comma-separated point (or vertex) set; default everything")
        sp.add_argument("--graph", help="adjacency JSON; checks excellence of --points instead")
        sp.add_argument("--budget", type=int, default=None, help="exact search size limit")

    stp = sub.add_parser("stability").add_subparsers(dest="stability_command", required=True)
    sp = add(stp, "info", cmd_stability_info)
    learner_opts(sp)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--budget", type=int, default=None)
    sp.add_argument("--units", choices=("nats", "bits"), default="nats")
    goodsets_opts(add(stp, "goodsets", cmd_goodsets))
    goodsets_opts(add(sub, "goodsets", cmd_goodsets))

    add(sub, "generate", cmd_generate, help="write a generated class as a set-system file")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else argv
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except _Fail as f:
        _emit(f.payload)
        print(f"verification failed: {f.payload.get('message', 'see output')}", file=sys.stderr)
        return 1
    except (LabError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
