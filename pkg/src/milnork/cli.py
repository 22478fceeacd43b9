"""Command-line front end and the end-to-end reconstruction pipeline.

The pipeline assembles the quadratic-algebra fragment from certified symbol
values, recovers the graded lattice fragment relative to the declared
universe, applies the closure construction, and emits the geometry with its
axiom report.  All output JSON is canonical and byte-stable: the search seed
only affects internal search order, never the artifacts.
"""

import argparse
import itertools
import json
import sys

from . import geometry as geom_mod
from . import jsonio
from .abelcentral import (
    AbcGroup,
    CommutatorForm,
    MultFragment,
    duality_check,
    h2_brute_force,
    kummer_bridge,
    upsilon,
    word_normal_form,
)
from .groundfield import FieldTower, FunctionField
from .kmilnor import UNKNOWN, KContext, tame_chain
from .lattice import (
    DimUnknown,
    LatticeFragment,
    RationalSubgroup,
    Universe,
    delta_set,
    div_ell,
    epsilon_rigidity_check,
    recover_rank_1,
    recover_rank_r,
)

EXIT_OK = 0
EXIT_UNKNOWN = 2
EXIT_FAILURE = 3


class InsufficientUniverse(RuntimeError):
    pass


class TransferMismatch(RuntimeError):
    def __init__(self, witness):
        self.witness = witness
        super().__init__("transfer mismatch: %r" % (witness,))


class PipelineConfig:
    """Validated run configuration; the full pipeline needs five variables,
    rank-one recovery four, plain K-theory two."""

    def __init__(self, data):
        self.p = data["p"]
        self.ell = data["ell"]
        self.vars = data["vars"]
        self.seed = data.get("seed", 0)
        self.tower_seed = data.get("tower_seed", 0)
        self.budget = data.get("budget", 64)
        self.workers = data.get("workers", 1)
        self.max_rank = data.get("max_rank", 3)
        self.universe_decl = list(data.get("universe", []))
        self.auto_universe = data.get("auto_universe")
        if self.p == self.ell:
            raise ValueError("p and ell must differ")
        if self.vars < 2:
            raise ValueError("need at least two variables")
        if not 3 <= self.max_rank < self.vars:
            raise ValueError("max_rank must lie between 3 and vars - 1")

    def require_vars(self, k, what):
        if self.vars < k:
            raise ValueError("%s needs at least %d variables" % (what, k))

    def context(self):
        tower = FieldTower(self.p, seed=self.tower_seed)
        field = FunctionField(tower, self.vars)
        return KContext(field, self.ell)


def build_universe(ctx, config):
    """Construct the declared rational subgroups, appending deterministic
    pencil samples when an automatic universe is requested."""
    field = ctx.field
    gens = []
    for decl in config.universe_decl:
        gens.append(_decode_generator(field, decl))
    if config.auto_universe:
        if config.auto_universe.get("coordinates", True):
            for i in range(field.nvars):
                gens.append(field.var(i))
        count = config.auto_universe.get("bertini_samples", 0)
        pairs = list(itertools.combinations(range(field.nvars), 2))
        c = 1
        for k in range(count):
            i, j = pairs[k % len(pairs)]
            gens.append(field.var(i) + field.const(c) * field.var(j))
            if (k + 1) % len(pairs) == 0:
                c += 1
    subs = []
    seen = set()
    for n, g in enumerate(gens):
        key = g.key()
        if key in seen:
            continue
        seen.add(key)
        subs.append(RationalSubgroup(ctx, g, label="u%d" % len(subs)))
    if not subs:
        raise InsufficientUniverse("no universe declared")
    return subs


def _decode_generator(field, decl):
    if "var" in decl:
        return field.var(decl["var"])
    if "linear" in decl:
        g = field.const(decl.get("const", 0))
        for var, coef in sorted(decl["linear"].items()):
            g = g + field.const(coef) * field.var(int(var))
        return g
    if "ratfunc" in decl:
        return jsonio.decode_ratfunc(field.tower, decl["ratfunc"])
    raise ValueError("unknown generator declaration %r" % (decl,))


def run_pipeline(config):
    """The four reconstruction steps on the declared universe.

    Returns canonical artifacts: the degree-one and degree-two fragment with
    certified relations, the recovered lattice fragment, the geometry as a
    flat list, and the axiom report, each edge backed by a replayable
    certificate or a containment proof.
    """
    config.require_vars(5, "the full pipeline")
    ctx = config.context()
    subs = build_universe(ctx, config)
    if len(subs) < 5:
        raise InsufficientUniverse(
            "the pipeline needs several rational subgroups, got %d" % len(subs))
    universe = Universe(ctx, subs, budget=config.budget)

    # step 1: the quadratic algebra fragment on the universe generators
    gens = [s.gen for s in subs]
    kring = _quadratic_fragment(ctx, gens, config.budget,
                                workers=config.workers)

    # step 2: the graded lattice fragment
    r2 = recover_rank_r(universe, 2)
    r3 = recover_rank_r(universe, 3)
    r1 = recover_rank_1(universe, r2, r3)
    higher = []
    for r in range(4, config.max_rank + 1):
        higher.extend(recover_rank_r(universe, r))
    lat = LatticeFragment(r1 + r2 + r3 + higher)

    # step 3: the closure construction over the universe join oracle
    geometry = _universe_geometry(universe, r1)

    # step 4: axiom report
    report = geom_mod.check_axioms(geometry, exhaustive_limit=12)

    artifacts = {
        "version": jsonio.SCHEMA_VERSION,
        "config": {
            "p": config.p, "ell": config.ell, "vars": config.vars,
            "budget": config.budget,
            "universe_size": len(subs),
        },
        "tower": ctx.field.tower.snapshot(),
        "kring_fragment": kring,
        "lattice_fragment": lat.to_json(),
        "geometry": _geometry_json(geometry),
        "axiom_report": report.to_json(),
    }
    return artifacts, (ctx, universe, lat, geometry)


def _quadratic_fragment(ctx, gens, budget, workers=1):
    """Degree-one generators with certified degree-two relations: every
    generator pair carries either a nonzero-symbol certificate or an
    equality witness; unknown pairs are reported as such.

    Pairs are independent work items; with several workers they are mapped
    across a thread pool and collected back in declaration order, so the
    output does not depend on the worker count."""
    from .kmilnor import EQUAL

    def entry_for(pair):
        a, b = pair
        rel = ctx.kclass_compare(gens[a], gens[b], budget=budget)
        entry = {"pair": [a, b]}
        if rel == EQUAL:
            entry["relation"] = "equal-classes"
        elif ctx.jacobian_rank([gens[a], gens[b]]) < 2:
            # both classes live in a one-dimensional subfield, where every
            # degree-two symbol dies
            entry["relation"] = "vanishes-by-dimension"
        else:
            cert = ctx.canonical_certificate([gens[a], gens[b]], budget=budget)
            if cert is UNKNOWN:
                entry["relation"] = "unknown"
            else:
                entry["relation"] = "independent"
                entry["certificate"] = jsonio.encode_certificate(cert)
        return entry

    work = list(itertools.combinations(range(len(gens)), 2))
    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=workers) as ex:
            pairs = list(ex.map(entry_for, work))
    else:
        pairs = [entry_for(w) for w in work]
    return {
        "generators": [jsonio.encode_ratfunc(g) for g in gens],
        "pairs": pairs,
    }


def _universe_geometry(universe, rank1_nodes):
    points = sorted(rank1_nodes, key=lambda n: sorted(n.sources))

    def join(subset):
        tot = frozenset().union(*(n.sources for n in subset))
        return universe.closure(tot)

    def point_leq(pt, closed):
        return pt.sources <= closed

    view = geom_mod.GradedLatticeView(points, join, point_leq)
    return geom_mod.c_construction(view)


def _geometry_json(geometry):
    pts = {n: "p%d" % i for i, n in enumerate(
        sorted(geometry.points, key=lambda n: sorted(n.sources)))}
    flats = set()
    for r in range(len(pts) + 1):
        for sub in itertools.combinations(geometry.points, r):
            flats.add(frozenset(geometry.cl(sub)))
    return {
        "points": [
            {"id": pts[n], "sources": sorted(n.sources)} for n in pts
        ],
        "closed_sets": sorted(sorted(pts[n] for n in f) for f in flats),
    }


def run_roundtrip(config, permutation):
    """Run the pipeline on the original and on the permuted configuration
    and check that the induced lattice isomorphism transfers to exactly the
    permutation-induced map of geometry points."""
    artifacts1, (ctx1, uni1, lat1, g1) = run_pipeline(config)
    perm_data = {
        "p": config.p, "ell": config.ell, "vars": config.vars,
        "seed": config.seed, "tower_seed": config.tower_seed,
        "budget": config.budget, "workers": config.workers,
        "universe": [_permute_decl(d, permutation) for d in config.universe_decl],
    }
    if config.auto_universe:
        raise ValueError("roundtrip needs an explicit universe")
    config2 = PipelineConfig(perm_data)
    artifacts2, (ctx2, uni2, lat2, g2) = run_pipeline(config2)
    # declaration i maps to declaration i, so sources correspond by index
    node_map = {}
    nodes2 = {n.sources: n for n in lat2.nodes}
    for n in lat1.nodes:
        m = nodes2.get(n.sources)
        if m is None:
            raise TransferMismatch({"missing": sorted(n.sources)})
        node_map[n] = m
    try:
        ptmap = geom_mod.transfer_isomorphism(lat1, lat2, node_map,
                                              geom1=g1, geom2=g2)
    except geom_mod.NotIsomorphism as e:
        raise TransferMismatch(e.witness)
    expected = {n.sources: n for n in g2.points}
    for a, b in ptmap.items():
        if expected[a.sources] is not b:
            raise TransferMismatch({"point": sorted(a.sources)})
    return {
        "version": jsonio.SCHEMA_VERSION,
        "permutation": list(permutation),
        "points_transferred": len(ptmap),
        "lattices_isomorphic": True,
        "artifacts_equal": artifacts1["geometry"]["closed_sets"]
        == artifacts2["geometry"]["closed_sets"],
    }


def _permute_decl(decl, permutation):
    if "var" in decl:
        return {"var": permutation[decl["var"]]}
    if "linear" in decl:
        lin = {str(permutation[int(v)]): c for v, c in decl["linear"].items()}
        out = {"linear": lin}
        if "const" in decl:
            out["const"] = decl["const"]
        return out
    raise ValueError("cannot permute declaration %r" % (decl,))


# ---------------------------------------------------------------------------
# Subcommands.
# ---------------------------------------------------------------------------

def _load_input(args):
    if args.input and args.input != "-":
        with open(args.input) as fh:
            return json.load(fh)
    return json.load(sys.stdin)


def _emit(args, obj):
    text = jsonio.canonical_json(obj)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _context(args):
    tower = FieldTower(args.p, seed=args.tower_seed)
    field = FunctionField(tower, args.vars)
    return KContext(field, args.ell)


def cmd_symbol_eval(args):
    ctx = _context(args)
    data = _load_input(args)
    sym = jsonio.decode_symbol(ctx.field.tower, data["symbol"])
    chain = jsonio.decode_chain(ctx.field, data["chain"])
    out = tame_chain(ctx.field, sym, chain, ctx.ell)
    if out.is_scalar():
        _emit(args, {"scalar": out.scalar()})
    else:
        _emit(args, {"terms": [
            {"coeff": c, "symbol": jsonio.encode_symbol(s)}
            for c, s in out.terms
        ]})
    return EXIT_OK


def cmd_certify(args):
    ctx = _context(args)
    data = _load_input(args)
    elements = [jsonio.decode_ratfunc(ctx.field.tower, e)
                for e in data["elements"]]
    cert = ctx.certificate_search(elements, budget=args.budget, seed=args.seed,
                                  workers=args.workers)
    if cert is UNKNOWN:
        _emit(args, {"result": "unknown"})
        return EXIT_UNKNOWN
    if args.verify and not cert.replay():
        _emit(args, {"result": "replay-failed"})
        return EXIT_FAILURE
    _emit(args, {"result": "certified",
                 "certificate": jsonio.encode_certificate(cert)})
    return EXIT_OK


def cmd_dim(args):
    ctx = _context(args)
    data = _load_input(args)
    gens = [jsonio.decode_ratfunc(ctx.field.tower, e)
            for e in data["generators"]]
    lo, hi = ctx.milnor_dim_bounds(gens, budget=args.budget, seed=args.seed)
    _emit(args, {"lower": lo, "upper": hi})
    return EXIT_OK if lo == hi else EXIT_UNKNOWN


def cmd_lattice_build(args):
    ctx = _context(args)
    data = _load_input(args)
    from .lattice import omega

    nodes = []
    for i, gens_json in enumerate(data["subfields"]):
        gens = [jsonio.decode_ratfunc(ctx.field.tower, g) for g in gens_json]
        frag = omega(ctx, gens, label="L%d" % i, budget=args.budget)
        nodes.append({"label": frag.label, "rank": frag.rank,
                      "generators": [jsonio.encode_ratfunc(g)
                                     for g in frag.generators]})
    _emit(args, {"version": jsonio.SCHEMA_VERSION, "nodes": nodes})
    return EXIT_OK if all(n["rank"] is not None for n in nodes) else EXIT_UNKNOWN


def cmd_lattice_reconstruct(args):
    data = _load_input(args)
    data.setdefault("p", args.p)
    data.setdefault("ell", args.ell)
    data.setdefault("vars", args.vars)
    data.setdefault("seed", args.seed)
    data.setdefault("budget", args.budget)
    config = PipelineConfig(data)
    ctx = config.context()
    subs = build_universe(ctx, config)
    universe = Universe(ctx, subs, budget=config.budget)
    try:
        r2 = recover_rank_r(universe, 2)
        r3 = recover_rank_r(universe, 3)
        r1 = recover_rank_1(universe, r2, r3) if config.vars >= 4 else []
    except DimUnknown as e:
        _emit(args, {"error": "dim-unknown",
                     "candidates": [sorted(c) for c in e.candidates]})
        return EXIT_UNKNOWN
    lat = LatticeFragment(r1 + r2 + r3)
    if args.dot:
        with open(args.dot, "w") as fh:
            fh.write(lat.to_dot() + "\n")
    _emit(args, {"version": jsonio.SCHEMA_VERSION,
                 "lattice": lat.to_json()})
    return EXIT_OK


def cmd_delta(args):
    ctx = _context(args)
    data = _load_input(args)
    gen = jsonio.decode_ratfunc(ctx.field.tower, data["generator"])
    A = RationalSubgroup(ctx, gen)
    vals = [ctx.field.valuation(v["var"],
                                jsonio.decode_center(ctx.field.tower, v["center"]))
            for v in data["valuations"]]
    ds = delta_set(A, vals)
    _emit(args, {
        "entries": [
            {"var": e.valuation.var,
             "center": jsonio.encode_center(e.valuation.center),
             "point": jsonio.encode_center(e.point),
             "ram": e.ram}
            for e in ds
        ]
    })
    return EXIT_OK


def cmd_rigidity(args):
    data = _load_input(args)
    from .lattice import CounterexampleReport, RationalFragmentData, RigidityInstance

    inst = RigidityInstance(
        data["ell"], data["ambient_dim"],
        [RationalFragmentData(f["name"], [tuple(m) for m in f["members"]])
         for f in data["fragments"]])
    phi = tuple(tuple(row) for row in data["phi"])
    out = epsilon_rigidity_check(phi, inst)
    if isinstance(out, CounterexampleReport):
        _emit(args, {"result": "rejected", "kind": out.kind,
                     "details": _plain(out.details)})
        return EXIT_FAILURE
    _emit(args, {"result": "epsilon", "epsilon": out})
    return EXIT_OK


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        return [_plain(x) for x in obj]
    return obj


def cmd_geometry_check(args):
    data = _load_input(args)
    geometry = geom_mod.ClosureGeometry.from_json(data["geometry"])
    report = geom_mod.check_axioms(geometry)
    _emit(args, {"report": report.to_json()})
    return EXIT_OK if report.all_pass() else EXIT_FAILURE


def cmd_lcl_eval(args):
    data = _load_input(args)
    geometry = geom_mod.ClosureGeometry.from_json(data["geometry"])
    free, rows = geom_mod.eval_lcl(geometry, data["formula"],
                                   params=data.get("params"))
    _emit(args, {"free": free, "tuples": sorted(map(list, rows))})
    return EXIT_OK


def cmd_abc_verify(args):
    data = _load_input(args)
    G = jsonio.decode_abc_group(data["group"])
    out = {"rank": G.rank, "ell": G.ell,
           "kernel_dim": CommutatorForm(G).wedge_kernel().dim,
           "upsilon_pairing": upsilon(G).pairing_identity_holds()}
    if "words" in data:
        out["normal_forms"] = [
            {"word": w, "abelian": list(word_normal_form(w, G)[0]),
             "central": list(word_normal_form(w, G)[1])}
            for w in data["words"]
        ]
    if "h2" in data:
        res = h2_brute_force(data["h2"]["n"], data["h2"]["ell"])
        out["h2_dim"] = res.dim
    _emit(args, out)
    return EXIT_OK if out["upsilon_pairing"] else EXIT_FAILURE


def cmd_duality_check(args):
    data = _load_input(args)
    from .abelcentral import Mismatch

    G = jsonio.decode_abc_group(data["group"])
    mult = MultFragment.from_kernel(
        data["mult"]["n"], data["mult"]["ell"],
        [tuple(v) for v in data["mult"].get("kernel", [])])
    try:
        rep = duality_check(mult, G)
    except Mismatch as e:
        _emit(args, {"passed": False, "witness": _plain(e.witness)})
        return EXIT_FAILURE
    _emit(args, {"passed": True, "kernel_dim": rep["kernel_dim"]})
    return EXIT_OK


def cmd_kummer(args):
    data = _load_input(args)
    mult_K = MultFragment.from_kernel(
        data["mult_k"]["n"], data["mult_k"]["ell"],
        [tuple(v) for v in data["mult_k"].get("kernel", [])])
    mult_L = MultFragment.from_kernel(
        data["mult_l"]["n"], data["mult_l"]["ell"],
        [tuple(v) for v in data["mult_l"].get("kernel", [])])
    psi = kummer_bridge(tuple(map(tuple, data["phi"])), mult_K, mult_L,
                        pairing_K=data.get("pairing_k"),
                        pairing_L=data.get("pairing_l"))
    _emit(args, {"psi": [list(r) for r in psi]})
    return EXIT_OK


def cmd_pipeline(args):
    data = _load_input(args)
    for key, val in (("p", args.p), ("ell", args.ell), ("vars", args.vars)):
        data.setdefault(key, val)
    data.setdefault("seed", args.seed)
    data.setdefault("budget", args.budget)
    data.setdefault("workers", args.workers)
    config = PipelineConfig(data)
    try:
        artifacts, extras = run_pipeline(config)
    except DimUnknown as e:
        _emit(args, {"error": "dim-unknown",
                     "candidates": [sorted(c) for c in e.candidates]})
        return EXIT_UNKNOWN
    except InsufficientUniverse as e:
        _emit(args, {"error": "insufficient-universe", "detail": str(e)})
        return EXIT_FAILURE
    if args.verify:
        ctx = extras[0]
        for entry in artifacts["kring_fragment"]["pairs"]:
            cert = entry.get("certificate")
            if cert is None:
                continue
            decoded = jsonio.decode_certificate(ctx.field, cert)
            if not decoded.replay():
                _emit(args, {"error": "certificate-replay-failed",
                             "pair": entry["pair"]})
                return EXIT_FAILURE
    if args.dot:
        lat = extras[2]
        with open(args.dot, "w") as fh:
            fh.write(lat.to_dot() + "\n")
    ok = artifacts["axiom_report"]
    _emit(args, artifacts)
    passed = all(v["pass"] for v in ok.values())
    return EXIT_OK if passed else EXIT_FAILURE


def cmd_roundtrip(args):
    data = _load_input(args)
    perm = data.pop("permutation")
    for key, val in (("p", args.p), ("ell", args.ell), ("vars", args.vars)):
        data.setdefault(key, val)
    data.setdefault("seed", args.seed)
    data.setdefault("budget", args.budget)
    config = PipelineConfig(data)
    try:
        out = run_roundtrip(config, perm)
    except TransferMismatch as e:
        _emit(args, {"error": "transfer-mismatch", "witness": _plain(e.witness)})
        return EXIT_FAILURE
    _emit(args, out)
    return EXIT_OK


def build_parser():
    ap = argparse.ArgumentParser(
        prog="milnork",
        description="Exact mod-l Milnor K-theory and reconstruction recipes "
                    "over rational function fields on a closure of F_p.")
    ap.add_argument("--p", type=int, default=7)
    ap.add_argument("--ell", type=int, default=3)
    ap.add_argument("--vars", type=int, default=5)
    ap.add_argument("--budget", type=int, default=64)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--tower-seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", default=None)
    ap.add_argument("--dot", default=None,
                    help="also write the lattice fragment as DOT")
    ap.add_argument("--verify", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)
    commands = {
        "symbol-eval": cmd_symbol_eval,
        "certify": cmd_certify,
        "dim": cmd_dim,
        "lattice-build": cmd_lattice_build,
        "lattice-reconstruct": cmd_lattice_reconstruct,
        "delta": cmd_delta,
        "rigidity": cmd_rigidity,
        "geometry-check": cmd_geometry_check,
        "lcl-eval": cmd_lcl_eval,
        "abc-verify": cmd_abc_verify,
        "duality-check": cmd_duality_check,
        "kummer": cmd_kummer,
        "pipeline": cmd_pipeline,
        "roundtrip": cmd_roundtrip,
    }
    for name, fn in commands.items():
        p = sub.add_parser(name)
        p.add_argument("input", nargs="?", default="-",
                       help="JSON input file, or - for stdin")
        p.set_defaults(func=fn)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, RuntimeError) as e:
        sys.stderr.write("error: %s\n" % e)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
