"""Abelian-by-central mod-l group fragments.

Groups are carried as (rank, relation subspace) data: the abelianization is
(Z/l)^n, the commutator pairing is the wedge square reduced modulo the
declared relations, and words are collected explicitly when a concrete
normal form is wanted.  The cohomological side is checked against an honest
2-cocycle solver on the finite elementary abelian group.
"""

import itertools
from math import comb

from . import linalg


class BadSymbol(ValueError):
    pass


class TooLarge(ValueError):
    pass


class NotCompatible(ValueError):
    pass


class Mismatch(ValueError):
    def __init__(self, witness):
        self.witness = witness
        super().__init__("kernel mismatch at %r" % (witness,))


class ModEllSpace:
    """(Z/l)^n with subspaces in reduced canonical form."""

    def __init__(self, dim, ell):
        self.dim = dim
        self.ell = ell

    def subspace(self, vectors):
        return linalg.Subspace(self.dim, vectors, self.ell)

    def full(self):
        return self.subspace(linalg.identity(self.dim))


class AbcGroup:
    """A finitely generated abelian-by-central fragment: free rank n, prime
    l, and a declared subspace of the wedge square that the commutator map
    kills.  For l = 2 the central part tracked is the commutator span only.
    """

    def __init__(self, rank, ell, relations=()):
        self.rank = rank
        self.ell = ell
        self.wdim = linalg.wedge_dim(rank)
        self.relations = linalg.Subspace(self.wdim, relations, ell)
        self.two_adic = ell == 2

    def __repr__(self):
        return "AbcGroup(rank=%d, ell=%d, relations dim %d)" % (
            self.rank, self.ell, self.relations.dim)

    def central_reduce(self, wvec):
        """Canonical coset representative modulo the relation subspace."""
        v = [x % self.ell for x in wvec]
        for row in self.relations.basis:
            p = next(i for i, x in enumerate(row) if x)
            if v[p]:
                f = v[p]
                v = [(a - f * b) % self.ell for a, b in zip(v, row)]
        return tuple(v)

    def commutator(self, u, v):
        """[u, v] in the central quotient, for abelianized vectors u, v."""
        return self.central_reduce(
            linalg.wedge_vec(u, v, self.rank, self.ell))


def parse_word(text, rank):
    """Words like "x1 x2 x1^-1 x2^-1" or "x1*x3^2" into letter pairs."""
    letters = []
    for chunk in text.replace("*", " ").split():
        body = chunk
        exp = 1
        if "^" in chunk:
            body, e = chunk.split("^", 1)
            exp = int(e)
        if not body.startswith("x"):
            raise BadSymbol("unknown generator %r" % chunk)
        try:
            idx = int(body[1:]) - 1
        except ValueError:
            raise BadSymbol("unknown generator %r" % chunk)
        if not 0 <= idx < rank:
            raise BadSymbol("generator index out of range in %r" % chunk)
        sign = 1 if exp >= 0 else -1
        for _ in range(abs(exp)):
            letters.append((idx, sign))
    return letters


def word_normal_form(word, G):
    """Collect a word into (abelian exponent vector, central commutator part).

    Adjacent letters are swapped into sorted order, each transposition
    contributing a commutator; for odd l the l-th powers of generators are
    then discarded, since they die in the second Zassenhaus quotient.  For
    l = 2 only the commutator span is tracked, so squares are dropped from
    the reported central part as well.
    """
    if isinstance(word, str):
        word = parse_word(word, G.rank)
    n, l = G.rank, G.ell
    letters = []
    for idx, sign in word:
        if not 0 <= idx < n or sign not in (1, -1):
            raise BadSymbol("bad letter (%r, %r)" % (idx, sign))
        letters.append((idx, sign))
    central = [0] * G.wdim
    # insertion collection: move each letter left to its sorted position
    collected = []
    for idx, sign in letters:
        pos = len(collected)
        while pos > 0 and collected[pos - 1][0] > idx:
            j, s = collected[pos - 1]
            # swapping x_j^s past x_idx^sign contributes s*sign*[x_j, x_idx]
            w = linalg.wedge_index(idx, j, n)
            central[w] = (central[w] - s * sign) % l
            pos -= 1
        collected.insert(pos, (idx, sign))
    abelian = [0] * n
    for idx, sign in collected:
        abelian[idx] = (abelian[idx] + sign) % l
    return tuple(abelian), G.central_reduce(central)


class CommutatorForm:
    """The alternating pairing on the abelianization with values in the
    central quotient, together with its wedge-level matrix."""

    def __init__(self, G):
        self.G = G
        rows = []
        for row in linalg.identity(G.wdim):
            rows.append(G.central_reduce(row))
        # matrix of the quotient map on wedge coordinates, rows indexed by
        # wedge basis, written as a linear map for kernel extraction
        self.matrix = tuple(rows)

    def pair(self, u, v):
        return self.G.commutator(u, v)

    def wedge_kernel(self):
        """Kernel of the induced map on the wedge square, as a subspace."""
        ker = linalg.nullspace(linalg.transpose(self.matrix), self.G.ell)
        return linalg.Subspace(self.G.wdim, ker, self.G.ell)


def commutator_form(G):
    return CommutatorForm(G)


# ---------------------------------------------------------------------------
# Brute-force second cohomology of elementary abelian groups.
# ---------------------------------------------------------------------------

class H2Result:
    def __init__(self, n, ell, dim, basis, col_index):
        self.n = n
        self.ell = ell
        self.dim = dim
        self.basis = basis          # column-value vectors spanning H^2 reps
        self._col_index = col_index

    def cocycle(self, xvec):
        """Reconstruct the full 2-cocycle from its column values, peeling
        the second argument one basis vector at a time:
        f(g, h+e_j) = f(g, h) + f(g+h, e_j) - f(h, e_j)."""
        n, l = self.n, self.ell

        def f(g, h):
            total = 0
            gg = tuple(g)
            pp = tuple(0 for _ in range(n))
            for j in range(n):
                for _ in range(h[j] % l):
                    total += xvec[self._col_index[(gg, j)]]
                    total -= xvec[self._col_index[(pp, j)]]
                    gg = _add_basis(gg, j, l)
                    pp = _add_basis(pp, j, l)
            return total % l

        return f


def _add_basis(g, j, l):
    out = list(g)
    out[j] = (out[j] + 1) % l
    return tuple(out)


def _group_elements(n, ell):
    return list(itertools.product(range(ell), repeat=n))


def h2_brute_force(n, ell):
    """Dimension and basis of the degree-two cohomology of (Z/l)^n with
    trivial mod-l coefficients, by solving the 2-cocycle linear system.

    Normalized cocycles are determined by their values on pairs (g, e_j);
    peeling the last basis vector of the second argument turns the cocycle
    identity into linear conditions on those column values, and the identity
    for a general third argument follows by induction on its length.  The
    coboundaries are divided out exactly.
    """
    if ell ** n > 243:
        raise TooLarge("group of order %d is beyond the brute-force budget"
                       % ell ** n)
    import numpy as np

    l = ell
    elements = _group_elements(n, l)
    index = {g: i for i, g in enumerate(elements)}
    ncols = len(elements) * n
    # column (g, j) holds f(g, e_j)
    col_index = {(g, j): index[g] * n + j for g in elements for j in range(n)}

    def hat_row(g, h):
        """Coefficient vector of f(g, h) in terms of the column values,
        through the peeling recursion
        f(g, h+e_j) = f(g, h) + f(g+h, e_j) - f(h, e_j)."""
        row = {}
        gg = tuple(g)
        pp = zero
        for j in range(n):
            for _ in range(h[j] % l):
                c = col_index[(gg, j)]
                row[c] = row.get(c, 0) + 1
                c2 = col_index[(pp, j)]
                row[c2] = row.get(c2, 0) - 1
                gg = _add_basis(gg, j, l)
                pp = _add_basis(pp, j, l)
        return row

    rows = []
    zero = tuple(0 for _ in range(n))
    for g in elements:
        for h in elements:
            base = hat_row(g, h)
            gh = tuple((a + b) % l for a, b in zip(g, h))
            for j in range(n):
                row = dict(base)
                for c, v in (
                    (col_index[(gh, j)], 1),
                    (col_index[(h, j)], -1),
                ):
                    row[c] = row.get(c, 0) + v
                for c, v in hat_row(g, _add_basis(h, j, l)).items():
                    row[c] = row.get(c, 0) - v
                rows.append(row)
    for j in range(n):
        rows.append({col_index[(zero, j)]: 1})
    # int8 is safe: entries stay in 0..l-1 < 5 and row updates bound at 16
    M = np.zeros((len(rows), ncols), dtype=np.int8)
    for i, row in enumerate(rows):
        for c, v in row.items():
            M[i, c] = v % l
    Z = _np_nullspace(M, l)           # solution space = cocycle columns
    # coboundary columns: delta c (g, e_j) = c(g) + c(e_j) - c(g + e_j)
    nc = len(elements) - 1
    D = np.zeros((ncols, nc), dtype=np.int64)
    nonzero = [g for g in elements if g != zero]
    cidx = {g: i for i, g in enumerate(nonzero)}
    for g in elements:
        for j in range(n):
            r = col_index[(g, j)]
            ej = _add_basis(zero, j, l)
            for h, v in ((g, 1), (ej, 1), (tuple((a + b) % l for a, b in zip(g, ej)), -1)):
                if h != zero:
                    D[r, cidx[h]] = (D[r, cidx[h]] + v) % l
    B = _np_colspace(D, l)
    dim_h2 = Z.shape[0] - B.shape[0]
    # quotient basis: extend the coboundary space inside the cocycle space
    basis = []
    stack = [list(b) for b in B]
    for z in Z:
        cand = stack + [list(z)]
        if _np_rank(np.array(cand, dtype=np.int64), l) > len(stack):
            stack.append(list(z))
            basis.append(tuple(int(x) % l for x in z))
        if len(basis) == dim_h2:
            break
    simple_index = {}
    for g in elements:
        for j in range(n):
            simple_index[(g, j)] = col_index[(g, j)]
    return H2Result(n, ell, dim_h2, basis, simple_index)


def _np_rref(M, l):
    import numpy as np

    M = M % l
    rows, cols = M.shape
    r = 0
    pivots = []
    for c in range(cols):
        if r == rows:
            break
        nz = np.nonzero(M[r:, c])[0]
        if len(nz) == 0:
            continue
        pivot = r + int(nz[0])
        if pivot != r:
            M[[r, pivot]] = M[[pivot, r]]
        M[r] = (M[r] * pow(int(M[r, c]), -1, l)) % l
        hits = np.nonzero(M[:, c])[0]
        for i in hits:
            if i != r:
                M[i] = (M[i] - M[i, c] * M[r]) % l
        pivots.append(c)
        r += 1
    return M[:r], pivots


def _np_rank(M, l):
    if M.size == 0:
        return 0
    R, _ = _np_rref(M.copy(), l)
    return R.shape[0]


def _np_nullspace(M, l):
    import numpy as np

    R, pivots = _np_rref(M.copy(), l)
    cols = M.shape[1]
    free = [c for c in range(cols) if c not in pivots]
    out = np.zeros((len(free), cols), dtype=np.int64)
    for k, fcol in enumerate(free):
        out[k, fcol] = 1
        for r, p in enumerate(pivots):
            out[k, p] = (-int(R[r, fcol])) % l
    return out


def _np_colspace(M, l):
    R, _ = _np_rref(M.T.copy(), l)
    return R


def h2_predicted_dim(n, ell):
    """The presentation count: wedge plus Bockstein summands for odd l, the
    symmetric square for l = 2."""
    if ell == 2:
        return comb(n + 1, 2)
    return comb(n, 2) + n


class H2Presentation:
    """The generators-and-relations description of degree-two cohomology of
    an elementary abelian group: the decomposable part, the Bockstein part,
    and the defining relation (x tensor x) + binom(l, 2) x.

    Field-side fragments declare the Bockstein part to meet the decomposable
    part trivially, which identifies the wedge square with the image of the
    cup product.
    """

    def __init__(self, n, ell, field_side=False):
        self.n = n
        self.ell = ell
        self.field_side = field_side

    @property
    def dec_dim(self):
        return comb(self.n, 2) if self.ell != 2 else comb(self.n + 1, 2)

    @property
    def bockstein_dim(self):
        return 0 if (self.ell == 2 or self.field_side) else self.n

    @property
    def total_dim(self):
        return h2_predicted_dim(self.n, self.ell)

    def relation(self):
        return "(x tensor x) + C(%d, 2) x" % self.ell


# ---------------------------------------------------------------------------
# Upsilon and the duality with the multiplication fragment.
# ---------------------------------------------------------------------------

class UpsilonMap:
    """Dual of the commutator pairing: functionals on the central quotient
    land in the wedge square of the dual of the abelianization."""

    def __init__(self, G):
        self.G = G
        form = CommutatorForm(G)
        # the commutator map on wedge coordinates is the quotient projection;
        # its dual is composition, i.e. the transpose acting on functionals
        self.quotient_rows = form.matrix

    def apply(self, functional):
        """functional: coefficients on wedge coordinates, read modulo the
        relations (it must vanish on them); returns the same functional as
        an element of the wedge square of the dual."""
        G = self.G
        for rel in G.relations.basis:
            if sum(a * b for a, b in zip(functional, rel)) % G.ell:
                raise ValueError("functional does not kill the relations")
        return tuple(x % G.ell for x in functional)

    def pairing_identity_holds(self):
        """<Upsilon(f), u ^ v> = f([u, v]) for basis functionals and basis
        vectors, checked exhaustively."""
        G = self.G
        n, l = G.rank, G.ell
        ann = G.relations.annihilator()
        for f in ann.basis or ():
            img = self.apply(f)
            for i, j in itertools.combinations(range(n), 2):
                u = tuple(1 if k == i else 0 for k in range(n))
                v = tuple(1 if k == j else 0 for k in range(n))
                lhs = img[linalg.wedge_index(i, j, n)] % l
                com = G.commutator(u, v)
                rhs = sum(a * b for a, b in zip(f, com)) % l
                # f is well defined on the quotient, so pair with any rep
                if lhs != rhs:
                    return False
        return True

    def image(self):
        """The image subspace: the annihilator of the relations."""
        return self.G.relations.annihilator()


def upsilon(G):
    return UpsilonMap(G)


class MultFragment:
    """A finite fragment of the degree-two multiplication: the wedge square
    of a declared span of degree-one classes, modulo a known kernel."""

    def __init__(self, n, ell, kernel_vectors=(), provenance=None):
        self.n = n
        self.ell = ell
        self.wdim = linalg.wedge_dim(n)
        self.kernel = linalg.Subspace(self.wdim, kernel_vectors, ell)
        self.provenance = dict(provenance or {})

    @classmethod
    def from_kernel(cls, n, ell, kernel_vectors, provenance=None):
        return cls(n, ell, kernel_vectors, provenance)

    @classmethod
    def from_symbols(cls, ctx, gens, budget=64):
        """Assemble the fragment from certified symbol values: wedge basis
        vectors whose symbols admit a nonzero certificate are outside the
        kernel; pairs of generators with equal classes contribute kernel
        vectors.  Pairs that stay unknown are reported, not guessed."""
        from .kmilnor import EQUAL, UNKNOWN

        n = len(gens)
        ell = ctx.ell
        kernel = []
        certificates = {}
        unknown = []
        for a, b in itertools.combinations(range(n), 2):
            rel = ctx.kclass_compare(gens[a], gens[b], budget=budget)
            if rel == EQUAL:
                vec = [0] * linalg.wedge_dim(n)
                vec[linalg.wedge_index(a, b, n)] = 1
                kernel.append(tuple(vec))
                continue
            cert = ctx.certificate_search([gens[a], gens[b]], budget=budget,
                                          seed=(a, b))
            if cert is UNKNOWN:
                unknown.append((a, b))
            else:
                certificates[(a, b)] = cert
        prov = {"certified": sorted(certificates),
                "unknown": sorted(unknown)}
        frag = cls(n, ell, kernel, provenance=prov)
        frag.certificates = certificates
        frag.unknown_pairs = unknown
        return frag


def duality_check(mult, G):
    """The kernel of the commutator pairing must equal the kernel of the
    multiplication fragment, exactly as subspaces; the inclusion of the one
    is dual to the surjection of the other."""
    if mult.n != G.rank or mult.ell != G.ell:
        raise NotCompatible("fragment shapes disagree")
    R = CommutatorForm(G).wedge_kernel()
    W = mult.kernel
    if R == W:
        return {"passed": True, "kernel_dim": R.dim}
    for v in R.basis:
        if not W.contains(v):
            raise Mismatch(v)
    for v in W.basis:
        if not R.contains(v):
            raise Mismatch(v)
    raise Mismatch(None)


def abc_from_mult(mult):
    """The group fragment dual to a multiplication fragment."""
    return AbcGroup(mult.n, mult.ell, mult.kernel.basis)


# ---------------------------------------------------------------------------
# The Kummer bridge on finite fragments.
# ---------------------------------------------------------------------------

def kummer_bridge(phi, mult_K, mult_L, pairing_K=None, pairing_L=None):
    """Transport an isomorphism of degree-one fragments, compatible with the
    degree-two multiplication, to the dual isomorphism of the group-side
    fragments through the declared pairings.

    The defining identity is pairing_L(sigma, phi x) = pairing_K(psi sigma, x).
    Raises NotCompatible when phi does not match the two kernels.
    """
    n, l = mult_K.n, mult_K.ell
    if mult_L.n != n or mult_L.ell != l:
        raise NotCompatible("fragment shapes disagree")
    phi = linalg.mat(phi, l)
    if not linalg.is_invertible(phi, l):
        raise NotCompatible("phi is not invertible")
    wphi = linalg.wedge_map(phi, n, l)
    for v in mult_K.kernel.basis:
        img = linalg.mat_vec(wphi, v, l)
        if not mult_L.kernel.contains(img):
            raise NotCompatible("phi does not send the kernel into the kernel")
    wphi_inv = linalg.inverse(wphi, l)
    for v in mult_L.kernel.basis:
        img = linalg.mat_vec(wphi_inv, v, l)
        if not mult_K.kernel.contains(img):
            raise NotCompatible("phi inverse does not send the kernel back")
    BK = linalg.mat(pairing_K, l) if pairing_K is not None else linalg.identity(n)
    BL = linalg.mat(pairing_L, l) if pairing_L is not None else linalg.identity(n)
    if not (linalg.is_invertible(BK, l) and linalg.is_invertible(BL, l)):
        raise NotCompatible("pairings must be perfect")
    # sigma^T BL (phi x) = (psi sigma)^T BK x for all sigma, x
    psi = linalg.transpose(
        linalg.mat_mul(linalg.mat_mul(BL, phi, l), linalg.inverse(BK, l), l))
    return psi


def kummer_bridge_inverse(psi, mult_K, mult_L, pairing_K=None, pairing_L=None):
    """Recover phi from the dual map; the round trip is the identity."""
    n, l = mult_K.n, mult_K.ell
    BK = linalg.mat(pairing_K, l) if pairing_K is not None else linalg.identity(n)
    BL = linalg.mat(pairing_L, l) if pairing_L is not None else linalg.identity(n)
    phi = linalg.mat_mul(
        linalg.inverse(BL, l),
        linalg.mat_mul(linalg.transpose(linalg.mat(psi, l)), BK, l), l)
    return phi
