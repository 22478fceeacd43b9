"""Rational subgroups of the degree-one mod-l K-group, finite fragments of the
graded lattice of relatively algebraically closed subfields, the maximality
recipes recovering its graded pieces, divisor maps, delta sets and the
epsilon-rigidity test.

All recipes are evaluated relative to a declared finite universe of rational
subgroups; every output records the sources that generated it, and dimension
logic is three-valued (certified lower bound, axiom-backed upper bound,
unknown in between).
"""

import itertools
import random

from . import linalg
from .groundfield import INF, CoordValuation, FunctionField, RatFunc
from .kmilnor import UNKNOWN, _univariate_divisor


class ZeroInput(ValueError):
    pass


class NotMember(ValueError):
    pass


class DimUnknown(RuntimeError):
    """A recipe could not separate adjacent dimensions within its budget."""

    def __init__(self, candidates):
        self.candidates = candidates
        super().__init__("dimension unresolved for %d candidate(s)" % len(candidates))


class NotPreserving(ValueError):
    """The map does not stabilize a declared fragment; carries a witness."""

    def __init__(self, fragment, member_index):
        self.fragment = fragment
        self.member_index = member_index
        super().__init__(
            "map does not preserve fragment %r at member %d" % (fragment, member_index))


class RationalSubgroup:
    """The image of k(t)^x in the degree-one K-group, for a declared general
    element t.  Members are carried as univariate rational functions in the
    parameter and realized in the ambient field by substitution."""

    def __init__(self, ctx, gen, label=None):
        if gen.is_zero() or gen.is_constant():
            raise ZeroInput("a general element must be nonconstant")
        self.ctx = ctx
        self.gen = gen
        self.label = label if label is not None else "k(%r)" % (gen,)
        self.param = FunctionField(ctx.field.tower, 1)

    @property
    def coordinate_index(self):
        """Variable index when the generator is a plain coordinate, else None."""
        g = self.gen
        if len(g.num.terms) == 1 and g.den.is_constant():
            (exp, c), = g.num.terms.items()
            if sum(exp) == 1 and c.is_one():
                return exp.index(1)
        return None

    def member(self, g):
        """Realize a univariate function of the parameter inside the field."""
        if g.is_zero():
            raise ZeroInput("members are nonzero")
        return g.compose([self.gen])

    def member_from_points(self, zeros, poles):
        """The member with the given zeros and poles on the affine line."""
        t = self.param.var(0)
        num = self.param.one()
        for a, m in zeros:
            num = num * (t - self.param.const(a)) ** m
        den = self.param.one()
        for a, m in poles:
            den = den * (t - self.param.const(a)) ** m
        return num / den

    def pullback(self, f):
        """Express an ambient function in the parameter; NotMember if the
        generator is a coordinate and f involves other variables."""
        i = self.coordinate_index
        if i is None:
            raise NotMember("membership is only decidable for coordinate generators")
        if not f.vars_used() <= {i}:
            raise NotMember("function involves variables outside the subfield")
        def rename(poly):
            from .groundfield import SparsePoly
            return SparsePoly(1, {(e[i],): c for e, c in poly.terms.items()})
        return RatFunc(rename(f.num), rename(f.den))

    def __repr__(self):
        return "RationalSubgroup(%s)" % self.label


def div_ell(g, A):
    """Reduced divisor of a member, as a map point -> Z/l with zero sum.

    Points are compressed ground elements of the closure plus "inf"; the map
    is exact because the parameter line is genus zero.
    """
    ell = A.ctx.ell
    if isinstance(g, RatFunc) and g.num.nvars != 1:
        g = A.pullback(g)
    if g.is_zero():
        raise ZeroInput("divisor of zero")
    raw = _univariate_divisor(A.param, g, 0)
    out = {k: v % ell for k, v in raw.items() if v % ell}
    return out


class SubgroupFragment:
    """A finitely generated fragment of the subgroup attached to a subfield."""

    def __init__(self, label, generators, rank, sources=None, provenance=None):
        self.label = label
        self.generators = tuple(generators)
        self.rank = rank
        self.sources = frozenset(sources) if sources is not None else None
        self.provenance = dict(provenance or {})

    def __repr__(self):
        return "SubgroupFragment(%s, rank=%r)" % (self.label, self.rank)

    def __eq__(self, other):
        if not isinstance(other, SubgroupFragment):
            return NotImplemented
        if self.sources is not None and other.sources is not None:
            return self.sources == other.sources
        return self.key() == other.key()

    def __hash__(self):
        if self.sources is not None:
            return hash(self.sources)
        return hash(self.key())

    def key(self):
        return tuple(sorted(g.key() for g in self.generators))

    def contains_fragment(self, other):
        if self.sources is None or other.sources is None:
            raise ValueError("containment needs universe-sourced fragments")
        return other.sources <= self.sources


def omega(ctx, generators, label=None, budget=64):
    """The fragment generated by the classes of the given field elements.

    Ground constants die modulo l-th powers and are dropped; the rank is the
    certified dimension when the bounds agree, else None.
    """
    gens = []
    for g in generators:
        if g.is_zero():
            raise ZeroInput("omega of zero")
        if not g.is_constant():
            gens.append(g)
    lo, hi = ctx.milnor_dim_bounds(gens, budget=budget)
    rank = lo if lo == hi else None
    return SubgroupFragment(label or "omega", gens, rank)


class Universe:
    """A declared finite family of rational subgroups with a memoized rank
    function; the recipes are evaluated relative to it.

    Ranks are computed greedily through a certified independence oracle:
    algebraic independence obeys exchange, so a maximal independent subset
    collected in sorted order has the full rank, and the oracle answers are
    shared across the exponentially many subsets the recipes probe."""

    def __init__(self, ctx, subgroups, budget=64):
        self.ctx = ctx
        self.subgroups = list(subgroups)
        self.budget = budget
        self._rank_cache = {}
        self._indep_cache = {}
        self._closure_cache = {}
        self._flats_by_rank = {}
        self._unresolved = set()

    def __len__(self):
        return len(self.subgroups)

    def independent(self, indices):
        """Certified algebraic independence of the generators: dependence is
        decided by the transcendence bound, independence by one certified
        symbol of full length built from subfield translates."""
        from milnork.kmilnor import UNKNOWN as _UNKNOWN

        key = frozenset(indices)
        cached = self._indep_cache.get(key)
        if cached is not None:
            return cached
        if key in self._unresolved:
            raise DimUnknown([key])
        gens = [self.subgroups[i].gen for i in sorted(key)]
        hi = min(self.ctx.nvars, self.ctx.jacobian_rank(gens))
        if hi < len(key):
            out = False
        else:
            cert = self.ctx.certificate_search(
                gens, budget=self.budget, seed=repr(sorted(key)), shifts=True)
            if cert is _UNKNOWN:
                self._unresolved.add(key)
                raise DimUnknown([key])
            out = True
        self._indep_cache[key] = out
        return out

    def rank(self, indices):
        """Certified dimension of the join of the indexed subgroups.

        Raises DimUnknown when the certificate budget cannot close the gap.
        """
        key = frozenset(indices)
        cached = self._rank_cache.get(key)
        if cached is not None:
            return cached
        basis = []
        for i in sorted(key):
            if self.independent(frozenset(basis + [i])):
                basis.append(i)
        self._rank_cache[key] = len(basis)
        return len(basis)

    def closure(self, indices):
        """All universe subgroups that do not raise the rank of the set.

        A computed flat of the same rank containing the set already is its
        closure, so the exponentially many queries the geometry makes
        collapse onto the finitely many flats."""
        base = frozenset(indices)
        cached = self._closure_cache.get(base)
        if cached is not None:
            return cached
        r = self.rank(base)
        for flat in self._flats_by_rank.get(r, ()):
            if base <= flat:
                self._closure_cache[base] = flat
                return flat
        out = set(base)
        for i in range(len(self.subgroups)):
            if i in out:
                continue
            if self.rank(base | {i}) == r:
                out.add(i)
        out = frozenset(out)
        self._closure_cache[base] = out
        self._closure_cache[out] = out
        self._flats_by_rank.setdefault(r, []).append(out)
        return out

    def fragment(self, sources, rank, provenance=None):
        sources = frozenset(sources)
        gens = [self.subgroups[i].gen for i in sorted(sources)]
        label = "<" + ",".join(self.subgroups[i].label for i in sorted(sources)) + ">"
        prov = dict(provenance or {})
        # maximality here always means maximality inside the declared universe
        prov.setdefault("universe_relative", True)
        return SubgroupFragment(label, gens, rank, sources=sources,
                                provenance=prov)


def recover_rank_r(universe, r, budget=None):
    """Fragments of the rank-r lattice layer: joins of universe subsets that
    are maximal, within the universe, among sets of dimension exactly r."""
    if r < 2:
        raise ValueError("the recipe applies to rank two and above")
    if budget is not None:
        universe.budget = budget
    n = len(universe)
    flats = {}
    for seed in itertools.combinations(range(n), r):
        if universe.rank(seed) != r:
            continue
        closed = universe.closure(seed)
        if closed not in flats:
            flats[closed] = seed
    out = []
    for closed in sorted(flats, key=lambda s: sorted(s)):
        out.append(universe.fragment(closed, r, provenance={"seed": sorted(flats[closed])}))
    return out


def recover_rank_1(universe, rank2_sets, rank3_sets, budget=None):
    """Rank-one fragments recovered through the witness conditions: distinct
    rank-two subgroups inside a common rank-three one, linked through an
    outside rational direction, intersecting in the fragment."""
    if budget is not None:
        universe.budget = budget
    out = {}
    by2 = list(rank2_sets)
    by3 = list(rank3_sets)
    n = len(universe)
    for i1, i2 in itertools.combinations(range(len(by2)), 2):
        B1, B2 = by2[i1], by2[i2]
        if B1.sources == B2.sources:
            continue
        inter = B1.sources & B2.sources
        if not inter:
            continue
        if universe.rank(inter) != 1:
            continue
        A_sources = universe.closure(inter)
        if A_sources in out:
            continue
        witness = _rank1_witness(universe, B1, B2, by3, n)
        if witness is None:
            continue
        prov = {"B1": sorted(B1.sources), "B2": sorted(B2.sources)}
        prov.update(witness)
        out[A_sources] = universe.fragment(A_sources, 1, provenance=prov)
    return [out[k] for k in sorted(out, key=lambda s: sorted(s))]


def _rank1_witness(universe, B1, B2, rank3_sets, n):
    """Search D rational, C, B1', B2' rank three, E rank two satisfying the
    recipe's side conditions; returns provenance or None."""
    for C in rank3_sets:
        if not (B1.sources | B2.sources) <= C.sources:
            continue
        for d in range(n):
            if d in C.sources:
                continue
            B1p = next((X for X in rank3_sets
                        if (B1.sources | {d}) <= X.sources), None)
            B2p = next((X for X in rank3_sets
                        if (B2.sources | {d}) <= X.sources), None)
            if B1p is None or B2p is None:
                continue
            shared = B1p.sources & B2p.sources
            base = (B1.sources & B2.sources) | {d}
            try:
                if universe.rank(base) != 2:
                    continue
            except DimUnknown:
                continue
            e_sources = universe.closure(base)
            if not e_sources <= shared:
                continue
            return {"D": d, "C": sorted(C.sources),
                    "B1p": sorted(B1p.sources), "B2p": sorted(B2p.sources),
                    "E": sorted(e_sources)}
    return None


class DeltaEntry:
    __slots__ = ("valuation", "point", "ram", "w")

    def __init__(self, valuation, point, ram, w):
        self.valuation = valuation
        self.point = point      # compressed ground element or INF
        self.ram = ram          # value of v on the local parameter at the point
        self.w = w              # the induced divisorial valuation of k(t)

    def member_value(self, A, g):
        """Image of a member in A/A_v, i.e. its divisor coefficient at the
        point scaled by the ramification."""
        div = div_ell(g, A)
        key = "inf" if self.point is INF else self.point.compress_key()
        return (self.ram * div.get(key, 0)) % A.ctx.ell

    def __repr__(self):
        return "DeltaEntry(point=%r, ram=%d)" % (self.point, self.ram)


class DeltaSet:
    """The index-l subgroups of a rational subgroup cut out by the unit
    groups of the declared ambient valuations."""

    def __init__(self, base, entries):
        self.base = base
        self.entries = list(entries)

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)


def delta_set(A, ambient_vals):
    """Restrict each ambient coordinate valuation to the subfield k(t).

    Valuations on which the subgroup consists of units are skipped, as are
    those whose ramification on the parameter is divisible by l (there the
    subgroup again lands in the units modulo l-th powers).
    """
    ctx = A.ctx
    field = ctx.field
    entries = []
    for v in ambient_vals:
        n, res = field.order_and_residue(A.gen, v)
        if n > 0:
            point = field.tower.zero().compress()
            ram = n
        elif n < 0:
            point = INF
            ram = -n
        else:
            if not res.is_constant():
                continue  # v is trivial on the subfield
            c = res.constant_value(field.tower)
            point = c.compress()
            ram, _ = field.order_and_residue(A.gen - field.const(c), v)
        if ram % ctx.ell == 0:
            continue
        w = CoordValuation(0, point if point is not INF else INF, 1)
        entries.append(DeltaEntry(v, point, ram, w))
    ds = DeltaSet(A, entries)
    _check_delta_index(A, ds)
    return ds


def _check_delta_index(A, ds):
    """Each entry must cut out an index-l subgroup: some member has nonzero
    image in A/A_v."""
    for entry in ds.entries:
        if entry.point is INF:
            g = A.param.var(0)
        else:
            g = A.param.var(0) - A.param.const(entry.point)
        if entry.member_value(A, g) % A.ctx.ell == 0:
            raise AssertionError("delta entry fails the index-l condition")


def very_general_search(ctx, x, y, budget, ambient_vals=(), seed=0):
    """Sample b then a and return the first pair making (x+a)/(y+b) pass the
    declared checks: the candidate is nonconstant (Bertini-style general
    declaration) and every declared ambient valuation restricting
    nontrivially to its subfield is prime-to-l ramified."""
    if budget <= 0:
        return UNKNOWN
    rng = random.Random(repr(("very-general", seed)))
    field = ctx.field
    stream = ctx._center_stream(rng)
    trials = [(field.tower.zero(), field.tower.zero())]
    while len(trials) < budget:
        b = next(stream)
        a = next(stream)
        trials.append((a, b))
    for a, b in trials[:budget]:
        den = y + field.const(b)
        if den.is_zero():
            continue
        z = (x + field.const(a)) / den
        if z.is_zero() or z.is_constant():
            continue
        if _fibers_ell_unramified(ctx, z, ambient_vals):
            return a, b
    return UNKNOWN


def _fibers_ell_unramified(ctx, z, ambient_vals):
    field = ctx.field
    for v in ambient_vals:
        ram = getattr(v, "ram", 1)
        val = getattr(v, "valuation", v)
        try:
            n, res = field.order_and_residue(z, val)
        except ZeroInput:
            return False
        if n != 0:
            e = abs(n) * ram
        else:
            if not res.is_constant():
                continue
            c = res.constant_value(field.tower)
            e, _ = field.order_and_residue(z - field.const(c), val)
            e = abs(e) * ram
        if e % ctx.ell == 0:
            return False
    return True


class AmbientValuation:
    """A declared ambient coordinate valuation together with the ramification
    it acquired through recorded covers."""

    __slots__ = ("valuation", "ram")

    def __init__(self, valuation, ram=1):
        self.valuation = valuation
        self.ram = ram

    def __repr__(self):
        return "AmbientValuation(%r, ram=%d)" % (self.valuation, self.ram)


class LatticeFragment:
    """Finite fragment of the graded lattice: nodes with ranks and the
    containment order, which must respect the grading."""

    def __init__(self, nodes):
        self.nodes = list(nodes)
        for a, b in itertools.permutations(self.nodes, 2):
            if a.sources is None or b.sources is None:
                continue
            if a.sources < b.sources and not (a.rank < b.rank):
                raise ValueError("containment order violates the grading")

    def edges(self):
        out = []
        for i, a in enumerate(self.nodes):
            for j, b in enumerate(self.nodes):
                if i != j and a.sources < b.sources:
                    out.append((i, j))
        return out

    def rank_nodes(self, r):
        return [n for n in self.nodes if n.rank == r]

    def to_json(self):
        from . import jsonio

        return {
            "nodes": [
                {
                    "label": n.label,
                    "rank": n.rank,
                    "generators": [jsonio.encode_ratfunc(g)
                                   for g in n.generators],
                    "sources": sorted(n.sources) if n.sources is not None else None,
                    "provenance": _jsonable(n.provenance),
                }
                for n in self.nodes
            ],
            "edges": self.edges(),
        }

    def to_dot(self):
        lines = ["digraph lattice {"]
        for i, n in enumerate(self.nodes):
            lines.append('  n%d [label="%s (r=%s)"];' % (i, n.label, n.rank))
        covers = set(self.edges())
        # keep only covering edges for readability
        for (i, j) in sorted(covers):
            if any((i, k) in covers and (k, j) in covers
                   for k in range(len(self.nodes)) if k not in (i, j)):
                continue
            lines.append("  n%d -> n%d;" % (i, j))
        lines.append("}")
        return "\n".join(lines)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in sorted(obj.items(), key=lambda kv: str(kv[0]))}
    if isinstance(obj, (list, tuple, set, frozenset)):
        return [_jsonable(v) for v in obj]
    return obj


# ---------------------------------------------------------------------------
# Epsilon rigidity.
# ---------------------------------------------------------------------------

class CounterexampleReport:
    """Why an automorphism candidate is not a single scalar on the declared
    rational fragments."""

    def __init__(self, kind, details):
        self.kind = kind
        self.details = details

    def __repr__(self):
        return "CounterexampleReport(%s: %s)" % (self.kind, self.details)


class RationalFragmentData:
    """A rational subgroup fragment in ambient coordinates.

    members: rows, the ambient coordinates of the point classes (t - c_j);
    the divisor of row j is [c_j] - [inf], so the delta-set data of the
    fragment is carried implicitly by the row order.
    """

    def __init__(self, name, members):
        self.name = name
        self.members = tuple(tuple(m) for m in members)

    def __repr__(self):
        return "RationalFragmentData(%s)" % self.name


class RigidityInstance:
    def __init__(self, ell, ambient_dim, fragments):
        self.ell = ell
        self.n = ambient_dim
        self.fragments = list(fragments)

    def triangles(self):
        """Witness triples connecting fragments pairwise: members u in A,
        v in B and w in C with w = u - v in ambient coordinates, u and v
        independent."""
        out = []
        for (ia, A), (ib, B), (ic, C) in itertools.permutations(
                enumerate(self.fragments), 3):
            for ju, u in enumerate(A.members):
                for jv, v in enumerate(B.members):
                    if linalg.rank((u, v), self.ell) < 2:
                        continue
                    w = linalg.sub_vec(u, v, self.ell)
                    for jw, wc in enumerate(C.members):
                        if wc == w:
                            out.append((ia, ib, ic, ju, jv, jw))
        return out


def epsilon_rigidity_check(phi, instance):
    """Solve for the scalar by which an invertible map acts on every declared
    good rational fragment, through the divisor intertwining constraint.

    Returns the common unit when all fragments agree and the agreement graph
    is connected; otherwise a CounterexampleReport naming the first violated
    constraint or the missing connecting triangle.  Raises NotPreserving when
    a fragment is not stabilized.
    """
    l = instance.ell
    epsilons = []
    for frag in instance.fragments:
        M = frag.members
        k = len(M)
        images = [linalg.mat_vec(phi, m, l) for m in M]
        # coordinates of each image in the member basis
        A = linalg.transpose(M)
        P = []
        for j, img in enumerate(images):
            sol = linalg.solve(A, img, l)
            if sol is None:
                raise NotPreserving(frag.name, j)
            P.append(sol)
        # divisor intertwining forces P diagonal with a single unit
        for j, row in enumerate(P):
            for i in range(k):
                if i != j and row[i]:
                    return CounterexampleReport(
                        "divisor-mixing",
                        {"fragment": frag.name, "member": j,
                         "hits": i})
        diag = [P[j][j] for j in range(k)]
        if any(d == 0 for d in diag):
            raise NotPreserving(frag.name, diag.index(0))
        if len(set(diag)) != 1:
            j = next(j for j in range(k) if diag[j] != diag[0])
            return CounterexampleReport(
                "unequal-on-fragment",
                {"fragment": frag.name, "members": (0, j),
                 "epsilons": (diag[0], diag[j])})
        epsilons.append(diag[0])
    if not epsilons:
        return CounterexampleReport("no-fragments", {})
    if len(set(epsilons)) == 1:
        return epsilons[0]
    # need the very-general triangles to glue the fragments together
    parent = list(range(len(instance.fragments)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for ia, ib, ic, ju, jv, jw in instance.triangles():
        ea, eb, ec = epsilons[ia], epsilons[ib], epsilons[ic]
        if not (ea == eb == ec):
            return CounterexampleReport(
                "triangle-violated",
                {"fragments": (instance.fragments[ia].name,
                               instance.fragments[ib].name,
                               instance.fragments[ic].name),
                 "epsilons": (ea, eb, ec)})
        for x, y in ((ia, ib), (ib, ic)):
            parent[find(x)] = find(y)
    comps = {find(i) for i in range(len(instance.fragments))}
    if len(comps) > 1:
        groups = {}
        for i in range(len(instance.fragments)):
            groups.setdefault(find(i), []).append(instance.fragments[i].name)
        return CounterexampleReport(
            "missing-triangle", {"components": sorted(groups.values())})
    return epsilons[0]
