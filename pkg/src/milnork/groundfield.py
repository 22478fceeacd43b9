"""Exact arithmetic in a computable algebraic closure of F_p and in the
rational function field over it.

The closure is modelled by finite fields F_{p^m} glued along a divisibility
spine: every instantiated level divides the top spine level, and all
embeddings are solved through the top, which makes them compatible by
construction.  Elements never leave exact arithmetic.
"""

import random
import threading
from math import gcd


class LevelError(ValueError):
    """Embedding requested between incomparable tower levels."""


class ZeroError(ZeroDivisionError):
    """Root or inverse of zero requested."""


class ZeroPolyError(ValueError):
    """Root finding on the zero polynomial."""


class ZeroInputError(ValueError):
    """Valuation of the zero function requested."""


class _Infinity:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INF"


INF = _Infinity()


def _lcm(a, b):
    return a * b // gcd(a, b)


def _prime_factors(n):
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


# ---------------------------------------------------------------------------
# F_p[x] arithmetic on little-endian coefficient lists of ints.
# ---------------------------------------------------------------------------

def _ptrim(a):
    while a and a[-1] == 0:
        a.pop()
    return a


def _pmul(a, b, p):
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] = (out[i + j] + ai * bj) % p
    return _ptrim(out)


def _pmod(a, f, p):
    # f monic
    a = list(a)
    df = len(f) - 1
    while len(a) - 1 >= df:
        c = a[-1] % p
        if c:
            k = len(a) - 1 - df
            for i in range(df):
                a[k + i] = (a[k + i] - c * f[i]) % p
        a.pop()
    return _ptrim(a)


def _pdivmod(a, f, p):
    # f monic
    a = list(a)
    df = len(f) - 1
    q = [0] * max(0, len(a) - df)
    while len(a) - 1 >= df:
        c = a[-1] % p
        k = len(a) - 1 - df
        q[k] = c
        if c:
            for i in range(df):
                a[k + i] = (a[k + i] - c * f[i]) % p
        a.pop()
    return _ptrim(q), _ptrim(a)


def _pmonic(a, p):
    if not a:
        return []
    inv = pow(a[-1], -1, p)
    return [(x * inv) % p for x in a]


def _pgcd(a, b, p):
    a, b = _ptrim(list(a)), _ptrim(list(b))
    while b:
        bm = _pmonic(b, p)
        r = _pmod(a, bm, p)
        a, b = b, r
    return _pmonic(a, p)


def _ppowmod(base, e, f, p):
    result = [1]
    base = _pmod(base, f, p)
    while e:
        if e & 1:
            result = _pmod(_pmul(result, base, p), f, p)
        base = _pmod(_pmul(base, base, p), f, p)
        e >>= 1
    return result


def _pxgcd(a, b, p):
    # returns (g, s, t) with s*a + t*b = g, g monic
    r0, r1 = _ptrim(list(a)), _ptrim(list(b))
    s0, s1 = [1], []
    t0, t1 = [], [1]
    while r1:
        r1m = _pmonic(r1, p)
        lead_inv = pow(r1[-1], -1, p) if r1 else 1
        q, r = _pdivmod(r0, r1m, p)
        q = [(x * lead_inv) % p for x in q]
        r0, r1 = r1, r
        s0, s1 = s1, _ptrim([(x - y) % p for x, y in
                             zip(s0 + [0] * len(_pmul(q, s1, p)), _pmul(q, s1, p) + [0] * len(s0))])
        t0, t1 = t1, _ptrim([(x - y) % p for x, y in
                             zip(t0 + [0] * len(_pmul(q, t1, p)), _pmul(q, t1, p) + [0] * len(t0))])
    if not r0:
        return [], s0, t0
    inv = pow(r0[-1], -1, p)
    scale = lambda v: [(x * inv) % p for x in v]
    return scale(r0), scale(s0), scale(t0)


def _is_irreducible(f, p):
    # Rabin test; f monic of degree n >= 1.
    n = len(f) - 1
    if n == 1:
        return True
    x = [0, 1]
    h = _ppowmod(x, p ** n, f, p)
    if _ptrim([(a - b) % p for a, b in zip(h + [0] * 2, x + [0] * len(h))]):
        return False
    for q in _prime_factors(n):
        h = _ppowmod(x, p ** (n // q), f, p)
        d = _pgcd([(a - b) % p for a, b in zip(h + [0] * 2, x + [0] * len(h))], f, p)
        if len(d) - 1 > 0:
            return False
    return True


def _find_irreducible(p, n, rng):
    if n == 1:
        return [0, 1]
    while True:
        f = [rng.randrange(p) for _ in range(n)] + [1]
        if _is_irreducible(f, p):
            return f


# ---------------------------------------------------------------------------
# The tower.
# ---------------------------------------------------------------------------

class _Level:
    __slots__ = ("degree", "modulus")

    def __init__(self, degree, modulus):
        self.degree = degree
        self.modulus = modulus  # monic, little-endian int list, length degree+1


class FieldTower:
    """A compatible tower of finite fields modelling the closure of F_p.

    Levels are instantiated lazily.  The spine is a divisibility chain of
    levels 1 | M_1 | M_2 | ...; whenever a level m outside the chain is
    needed, the top grows to lcm(top, m) first.  Each level m stores the
    image of its power-basis generator inside the top field, so embeddings
    between comparable levels are solved exactly through the top.
    """

    def __init__(self, p, seed=0):
        if p < 2 or any(p % q == 0 for q in range(2, min(p, 1000)) if q * q <= p):
            raise ValueError("p must be prime")
        self.p = p
        self.seed = seed
        self._rng = random.Random(("tower", p, seed).__repr__())
        self._lock = threading.RLock()
        self._levels = {1: _Level(1, [0, 1])}
        self._spine = [1]
        self._gen_top = {1: (0,)}  # image of the level generator in the top
        self._embed_solvers = {}   # level -> (top, solver data)
        self._construction_log = [{"level": 1, "modulus": [0, 1]}]

    # -- public -------------------------------------------------------------

    @property
    def top(self):
        return self._spine[-1]

    def levels(self):
        return sorted(self._levels)

    def zero(self):
        return GroundElem(self, 1, (0,))

    def one(self):
        return GroundElem(self, 1, (1,))

    def from_int(self, k):
        return GroundElem(self, 1, (k % self.p,))

    def element(self, level, coeffs):
        self.ensure_level(level)
        coeffs = tuple(c % self.p for c in coeffs)
        if len(coeffs) != level:
            raise ValueError("coefficient vector must have length %d" % level)
        return GroundElem(self, level, coeffs)

    def generator(self, level):
        """The power-basis generator of F_{p^level}."""
        self.ensure_level(level)
        if level == 1:
            return self.one()
        return GroundElem(self, level, tuple(1 if i == 1 else 0 for i in range(level)))

    def element_from_index(self, level, k):
        """The k-th element of F_{p^level} in base-p digit order."""
        self.ensure_level(level)
        digits = []
        for _ in range(level):
            digits.append(k % self.p)
            k //= self.p
        return GroundElem(self, level, tuple(digits))

    def elements(self, level):
        for k in range(self.p ** level):
            yield self.element_from_index(level, k)

    def ensure_level(self, m):
        if m in self._levels:
            return
        with self._lock:
            if m in self._levels:
                return
            if self.top % m:
                self._grow_spine(_lcm(self.top, m))
            if m in self._levels:
                return
            f = _find_irreducible(self.p, m, self._rng)
            root = self._root_in_top(f)
            self._levels[m] = _Level(m, f)
            self._gen_top[m] = root
            self._construction_log.append({"level": m, "modulus": list(f)})

    def tower_embed(self, x, target_level):
        """Image of x under the fixed embedding into F_{p^target_level}."""
        if target_level % x.level:
            raise LevelError(
                "level %d does not divide target level %d" % (x.level, target_level)
            )
        self.ensure_level(target_level)
        return self._lift(x, target_level)

    def ell_th_root(self, x, ell):
        """Some y with y^ell = x, raising the level as needed."""
        if x.is_zero():
            raise ZeroError("zero has no multiplicative ell-th root")
        if x.is_one():
            return self.one()
        level = x.level
        while True:
            y = self._root_at_level(self._lift(x, level), ell)
            if y is not None:
                return y
            level *= ell
            self.ensure_level(level)

    def snapshot(self):
        """Deterministic record of all tower choices made so far."""
        return {
            "p": self.p,
            "seed": self.seed,
            "spine": list(self._spine),
            "levels": [dict(e) for e in self._construction_log],
        }

    # -- level arithmetic (coefficient tuples) ------------------------------

    def _add(self, level, a, b):
        p = self.p
        return tuple((x + y) % p for x, y in zip(a, b))

    def _sub(self, level, a, b):
        p = self.p
        return tuple((x - y) % p for x, y in zip(a, b))

    def _neg(self, level, a):
        p = self.p
        return tuple((-x) % p for x in a)

    def _mul(self, level, a, b):
        f = self._levels[level].modulus
        out = _pmod(_pmul(list(a), list(b), self.p), f, self.p)
        return tuple(out + [0] * (level - len(out)))

    def _inv(self, level, a):
        if not any(a):
            raise ZeroError("inverse of zero")
        f = self._levels[level].modulus
        g, s, _ = _pxgcd(list(a), f, self.p)
        if len(g) != 1:
            raise ArithmeticError("non-unit in a field, modulus not irreducible?")
        inv_c = pow(g[0], -1, self.p)
        s = [(x * inv_c) % self.p for x in s]
        s = _pmod(s, f, self.p)
        return tuple(s + [0] * (level - len(s)))

    def _pow(self, level, a, e):
        if e < 0:
            a = self._inv(level, a)
            e = -e
        result = tuple([1] + [0] * (level - 1))
        while e:
            if e & 1:
                result = self._mul(level, result, a)
            a = self._mul(level, a, a)
            e >>= 1
        return result

    # -- spine and embeddings ------------------------------------------------

    def _grow_spine(self, new_top):
        old = self.top
        e = new_top // old
        p = self.p
        # irreducible g of degree e over the old top field
        g = self._find_irreducible_over(old, e)
        # elements of the composite ring are length-e lists of old-top vectors
        def rmul(a, b):
            out = [tuple([0] * old) for _ in range(len(a) + len(b) - 1)]
            for i, ai in enumerate(a):
                if any(ai):
                    for j, bj in enumerate(b):
                        out[i + j] = self._add(old, out[i + j], self._mul(old, ai, bj))
            # reduce mod g (monic over old top)
            de = len(g) - 1
            while len(out) - 1 >= de:
                c = out[-1]
                if any(c):
                    k = len(out) - 1 - de
                    for i in range(de):
                        out[k + i] = self._sub(old, out[k + i], self._mul(old, c, g[i]))
                out.pop()
            while len(out) < e:
                out.append(tuple([0] * old))
            return out

        one_old = tuple([1] + [0] * (old - 1))
        x_old = self._gen_vector(old)
        # search a primitive element z = y + c * x_old
        for idx in range(p ** old):
            c = self.element_from_index(old, idx).coeffs
            z = [self._mul(old, c, x_old), one_old] + [tuple([0] * old)] * (e - 2)
            flat_rows = []
            power = [one_old] + [tuple([0] * old)] * (e - 1)
            for k in range(new_top):
                flat_rows.append(tuple(v for blk in power for v in blk))
                power = rmul(power, z)
            # minimal polynomial: solve flat(z^new_top) = sum c_k flat(z^k)
            target = tuple(v for blk in power for v in blk)
            from . import linalg

            A = linalg.transpose(tuple(flat_rows))
            if linalg.rank(flat_rows, p) < new_top:
                continue
            sol = linalg.solve(A, target, p)
            if sol is None:
                continue
            minpoly = [(-s) % p for s in sol] + [1]
            zmat = A  # columns are z^k in the tensor basis
            zinv = linalg.inverse(zmat, p)
            self._levels[new_top] = _Level(new_top, minpoly)
            self._construction_log.append({"level": new_top, "modulus": list(minpoly)})
            # refresh generator images: everything factored through the old top
            new_gen = {}
            for m, v in self._gen_top.items():
                flat = tuple(list(v) + [0] * (new_top - old))
                new_gen[m] = tuple(linalg.mat_vec(zinv, flat, p))
            new_gen[new_top] = tuple(1 if i == 1 else 0 for i in range(new_top))
            if new_top == 1:
                new_gen[new_top] = (0,)
            self._gen_top = new_gen
            self._spine.append(new_top)
            self._embed_solvers.clear()
            return
        raise ArithmeticError("no primitive element found while growing the tower")

    def _gen_vector(self, level):
        if level == 1:
            return (0,)
        return tuple(1 if i == 1 else 0 for i in range(level))

    def _find_irreducible_over(self, level, degree):
        """Random monic irreducible of given degree over F_{p^level}."""
        if degree == 1:
            return [self._gen_vector(level), tuple([1] + [0] * (level - 1))]
        one = tuple([1] + [0] * (level - 1))
        q = self.p ** level
        while True:
            g = [tuple(self.element_from_index(level, self._rng.randrange(q)).coeffs)
                 for _ in range(degree)] + [one]
            if self._lpoly_irreducible(g, level):
                return g

    # polynomials over a level: lists of coefficient tuples, little endian

    def _lp_trim(self, a):
        while a and not any(a[-1]):
            a.pop()
        return a

    def _lp_mul(self, a, b, level):
        if not a or not b:
            return []
        zero = tuple([0] * level)
        out = [zero] * (len(a) + len(b) - 1)
        for i, ai in enumerate(a):
            if any(ai):
                for j, bj in enumerate(b):
                    out[i + j] = self._add(level, out[i + j], self._mul(level, ai, bj))
        return self._lp_trim(out)

    def _lp_monic(self, a, level):
        if not a:
            return []
        inv = self._inv(level, a[-1])
        return [self._mul(level, inv, c) for c in a]

    def _lp_mod(self, a, f, level):
        # f monic
        a = list(a)
        df = len(f) - 1
        while len(a) - 1 >= df:
            c = a[-1]
            if any(c):
                k = len(a) - 1 - df
                for i in range(df):
                    a[k + i] = self._sub(level, a[k + i], self._mul(level, c, f[i]))
            a.pop()
        return self._lp_trim(a)

    def _lp_divexact(self, a, f, level):
        a = list(a)
        f = self._lp_monic(list(f), level)
        df = len(f) - 1
        q = [tuple([0] * level)] * max(0, len(a) - df)
        while len(a) - 1 >= df:
            c = a[-1]
            k = len(a) - 1 - df
            q[k] = c
            if any(c):
                for i in range(df):
                    a[k + i] = self._sub(level, a[k + i], self._mul(level, c, f[i]))
            a.pop()
        return self._lp_trim(q)

    def _lp_gcd(self, a, b, level):
        a, b = self._lp_trim(list(a)), self._lp_trim(list(b))
        while b:
            bm = self._lp_monic(list(b), level)
            r = self._lp_mod(a, bm, level)
            a, b = b, r
        return self._lp_monic(a, level) if a else []

    def _lp_powmod(self, base, e, f, level):
        one = tuple([1] + [0] * (level - 1))
        result = [one]
        base = self._lp_mod(list(base), f, level)
        while e:
            if e & 1:
                result = self._lp_mod(self._lp_mul(result, base, level), f, level)
            base = self._lp_mod(self._lp_mul(base, base, level), f, level)
            e >>= 1
        return result

    def _lp_sub(self, a, b, level):
        zero = tuple([0] * level)
        n = max(len(a), len(b))
        a = list(a) + [zero] * (n - len(a))
        b = list(b) + [zero] * (n - len(b))
        return self._lp_trim([self._sub(level, x, y) for x, y in zip(a, b)])

    def _lpoly_irreducible(self, f, level):
        n = len(f) - 1
        q = self.p ** level
        one = tuple([1] + [0] * (level - 1))
        zero = tuple([0] * level)
        x = [zero, one]
        h = self._lp_powmod(x, q ** n, f, level)
        if self._lp_sub(h, x, level):
            return False
        for r in _prime_factors(n):
            h = self._lp_powmod(x, q ** (n // r), f, level)
            d = self._lp_gcd(self._lp_sub(h, x, level), f, level)
            if len(d) - 1 > 0:
                return False
        return True

    def _root_in_top(self, f):
        """A root in the top field of an F_p-irreducible f splitting there."""
        T = self.top
        g = [tuple([c % self.p] + [0] * (T - 1)) for c in f]
        root = self._lp_root(g, T)
        return root

    def _lp_root(self, g, level):
        """A root of g in F_{p^level}; g must split over that field."""
        p = self.p
        q = p ** level
        one = tuple([1] + [0] * (level - 1))
        zero = tuple([0] * level)
        g = self._lp_monic(self._lp_trim(list(g)), level)
        # restrict to roots living in the field
        x = [zero, one]
        xq = self._lp_powmod(x, q, g, level)
        g = self._lp_gcd(self._lp_sub(xq, x, level), g, level)
        if len(g) - 1 < 1:
            raise ArithmeticError("polynomial has no root in the requested field")
        while len(g) - 1 > 1:
            a = tuple(self.element_from_index(level, self._rng.randrange(q)).coeffs)
            if p == 2:
                # additive splitting by the absolute trace of a*x
                t = [zero, a]
                acc = [v for v in t]
                cur = t
                total_bits = level  # trace over F_2
                for _ in range(total_bits - 1):
                    cur = self._lp_powmod(cur, 2, g, level)
                    acc = self._lp_trim([
                        self._add(level, u, v)
                        for u, v in zip(
                            acc + [zero] * max(0, len(cur) - len(acc)),
                            cur + [zero] * max(0, len(acc) - len(cur)),
                        )
                    ])
                h = acc
            else:
                h = self._lp_powmod([a, one], (q - 1) // 2, g, level)
                h = self._lp_sub(h, [one], level)
            d = self._lp_gcd(h, g, level)
            if 0 < len(d) - 1 < len(g) - 1:
                g = d if len(d) <= (len(g) + 1) // 2 + 1 else self._lp_divexact(g, d, level)
        root = self._neg(level, g[0])
        return root

    def _root_at_level(self, x, ell):
        """An ell-th root of x at its own level, or None if there is none."""
        level = x.level
        N = self.p ** level - 1
        a = x.coeffs
        if N % ell:
            e = pow(ell, -1, N)
            return GroundElem(self, level, self._pow(level, a, e))
        s = 0
        u = N
        while u % ell == 0:
            u //= ell
            s += 1
        if self._pow(level, a, N // ell) != tuple([1] + [0] * (level - 1)):
            return None
        # split x into its ell-part and prime-to-ell part
        alpha = pow(u, -1, ell ** s)
        beta = pow(ell ** s, -1, u)
        part_l = self._pow(level, a, u * alpha)        # order a power of ell
        part_u = self._pow(level, a, (ell ** s) * beta)  # order prime to ell
        root_u = self._pow(level, part_u, pow(ell, -1, u))
        # generator of the ell-Sylow subgroup
        one = tuple([1] + [0] * (level - 1))
        q = self.p ** level
        while True:
            z = tuple(self.element_from_index(level, self._rng.randrange(1, q)).coeffs)
            zeta = self._pow(level, z, u)
            if self._pow(level, zeta, ell ** (s - 1)) != one:
                break
        # digits of log_zeta(part_l) in base ell
        gamma = self._pow(level, zeta, ell ** (s - 1))  # order ell
        gamma_pows = {one: 0}
        gp = one
        for i in range(1, ell):
            gp = self._mul(level, gp, gamma)
            gamma_pows[gp] = i
        T = 0
        acc = part_l
        for i in range(s):
            c = self._pow(level, acc, ell ** (s - 1 - i))
            d = gamma_pows[c]
            T += d * ell ** i
            acc = self._mul(level, acc, self._pow(level, zeta, (-d * ell ** i) % (ell ** s)))
        if T % ell:
            return None
        root_l = self._pow(level, zeta, T // ell)
        return GroundElem(self, level, self._mul(level, root_l, root_u))

    def _lift(self, x, M):
        m = x.level
        if m == M:
            return x
        T = self.top
        val = self._eval_gen(x)
        if M == T:
            return GroundElem(self, T, val)
        solver = self._embed_solver(M)
        coeffs = solver(val)
        if coeffs is None:
            raise LevelError("element does not lie in the target subfield")
        return GroundElem(self, M, coeffs)

    def _eval_gen(self, x):
        """Coordinates of x in the top field."""
        T = self.top
        if x.level == T:
            return x.coeffs
        g = self._gen_top[x.level]
        acc = tuple([0] * T)
        for c in reversed(x.coeffs):
            acc = self._mul(T, acc, g)
            acc = tuple((a + (c if i == 0 else 0)) % self.p for i, a in enumerate(acc))
        return acc

    def _embed_solver(self, M):
        from . import linalg

        T = self.top
        key = (M, T)
        cached = self._embed_solvers.get(key)
        if cached is not None:
            return cached
        with self._lock:
            cached = self._embed_solvers.get(key)
            if cached is not None:
                return cached
            g = self._gen_top[M]
            cols = []
            pw = tuple([1] + [0] * (T - 1))
            for _ in range(M):
                cols.append(pw)
                pw = self._mul(T, pw, g)
            A = linalg.transpose(tuple(cols))
            solver = linalg.presolve(A, self.p)
            self._embed_solvers[key] = solver
            return solver

    def common_level(self, x, y):
        m = _lcm(x.level, y.level)
        self.ensure_level(m)
        return self._lift(x, m), self._lift(y, m)


def tower_embed(x, target_level):
    return x.tower.tower_embed(x, target_level)


def ell_th_root(x, ell):
    return x.tower.ell_th_root(x, ell)


class GroundElem:
    """An element of the algebraic closure, living at a definite level."""

    __slots__ = ("tower", "level", "coeffs", "_min")

    def __init__(self, tower, level, coeffs):
        self.tower = tower
        self.level = level
        self.coeffs = tuple(coeffs)
        self._min = None

    def is_zero(self):
        return not any(self.coeffs)

    def __bool__(self):
        return any(self.coeffs)

    def is_one(self):
        return self.coeffs[0] == 1 and not any(self.coeffs[1:])

    def _binop(self, other, op):
        if isinstance(other, int):
            other = self.tower.from_int(other)
        if self.level == other.level:
            return GroundElem(self.tower, self.level,
                              op(self.level, self.coeffs, other.coeffs))
        a, b = self.tower.common_level(self, other)
        return GroundElem(self.tower, a.level, op(a.level, a.coeffs, b.coeffs))

    def __add__(self, other):
        return self._binop(other, self.tower._add)

    def __radd__(self, other):
        return self.__add__(other)

    def __sub__(self, other):
        return self._binop(other, self.tower._sub)

    def __rsub__(self, other):
        return (-self).__add__(other)

    def __mul__(self, other):
        return self._binop(other, self.tower._mul)

    def __rmul__(self, other):
        return self.__mul__(other)

    def __neg__(self):
        return GroundElem(self.tower, self.level, self.tower._neg(self.level, self.coeffs))

    def __truediv__(self, other):
        if isinstance(other, int):
            other = self.tower.from_int(other)
        return self * other.inverse()

    def inverse(self):
        return GroundElem(self.tower, self.level, self.tower._inv(self.level, self.coeffs))

    def __pow__(self, e):
        return GroundElem(self.tower, self.level, self.tower._pow(self.level, self.coeffs, e))

    def __eq__(self, other):
        if isinstance(other, int):
            other = self.tower.from_int(other)
        if not isinstance(other, GroundElem):
            return NotImplemented
        if self.level == other.level:
            return self.coeffs == other.coeffs
        a, b = self.tower.common_level(self, other)
        return a.coeffs == b.coeffs

    def __ne__(self, other):
        return not self.__eq__(other)

    def __hash__(self):
        return hash(self.compress_key())

    def compress(self):
        """The same element at its minimal level of definition."""
        if self._min is not None:
            level, coeffs = self._min
            return GroundElem(self.tower, level, coeffs)
        m = self.level
        p = self.tower.p
        best = self
        for d in sorted(d for d in range(1, m) if m % d == 0):
            if self ** (p ** d) == self:
                val = self.tower._eval_gen(self)
                sol = self.tower._embed_solver(d)(val)
                if sol is not None:
                    best = GroundElem(self.tower, d, sol)
                    break
        self._min = (best.level, best.coeffs)
        return best

    def compress_key(self):
        c = self.compress()
        return (c.level, c.coeffs)

    def frobenius(self, times=1):
        """Apply x -> x^p repeatedly."""
        return self ** (self.tower.p ** (times % self.level))

    def pth_root(self):
        return self ** (self.tower.p ** (self.level - 1))

    def multiplicative_order(self):
        if self.is_zero():
            raise ZeroError("order of zero")
        n = self.tower.p ** self.level - 1
        order = n
        for q in _prime_factors(n):
            while order % q == 0 and (self ** (order // q)).is_one():
                order //= q
        return order

    def __repr__(self):
        return "GroundElem(level=%d, coeffs=%s)" % (self.level, list(self.coeffs))


# ---------------------------------------------------------------------------
# Sparse multivariate polynomials and rational functions.
# ---------------------------------------------------------------------------

_PASCAL_CACHE = {}


def _pascal_row(tower, k):
    """Binomial coefficients C(k, 0..k) modulo the characteristic."""
    key = (tower.p, k)
    row = _PASCAL_CACHE.get(key)
    if row is None:
        p = tower.p
        row = [1]
        for r in range(1, k + 1):
            row = [1] + [(row[j - 1] + row[j]) % p for j in range(1, r)] + [1]
        row = tuple(row)
        _PASCAL_CACHE[key] = row
    return row


class SparsePoly:
    """Polynomial in d variables, exponent-vector keyed, zero-free terms."""

    __slots__ = ("nvars", "terms")

    def __init__(self, nvars, terms):
        self.nvars = nvars
        clean = {}
        for exp, c in terms.items():
            if c:
                clean[tuple(exp)] = c
        self.terms = clean

    @classmethod
    def zero(cls, nvars):
        return cls(nvars, {})

    @classmethod
    def constant(cls, nvars, c):
        return cls(nvars, {tuple([0] * nvars): c})

    @classmethod
    def variable(cls, nvars, i, one):
        exp = [0] * nvars
        exp[i] = 1
        return cls(nvars, {tuple(exp): one})

    def is_zero(self):
        return not self.terms

    def is_constant(self):
        return all(not any(e) for e in self.terms)

    def constant_value(self, tower):
        if self.is_zero():
            return tower.zero()
        (exp, c), = self.terms.items()
        if any(exp):
            raise ValueError("not a constant")
        return c

    def vars_used(self):
        used = set()
        for e in self.terms:
            for i, x in enumerate(e):
                if x:
                    used.add(i)
        return used

    def degree_in(self, i):
        if not self.terms:
            return -1
        return max(e[i] for e in self.terms)

    def __add__(self, other):
        out = dict(self.terms)
        for e, c in other.terms.items():
            if e in out:
                s = out[e] + c
                if s:
                    out[e] = s
                else:
                    del out[e]
            else:
                out[e] = c
        return SparsePoly(self.nvars, out)

    def __neg__(self):
        return SparsePoly(self.nvars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, GroundElem):
            if not other:
                return SparsePoly.zero(self.nvars)
            return SparsePoly(self.nvars, {e: c * other for e, c in self.terms.items()})
        out = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                c = c1 * c2
                if e in out:
                    s = out[e] + c
                    if s:
                        out[e] = s
                    else:
                        del out[e]
                elif c:
                    out[e] = c
        return SparsePoly(self.nvars, out)

    def __eq__(self, other):
        if not isinstance(other, SparsePoly):
            return NotImplemented
        if set(self.terms) != set(other.terms):
            return False
        return all(c == other.terms[e] for e, c in self.terms.items())

    def __ne__(self, other):
        return not self.__eq__(other)

    def key(self):
        return tuple(sorted((e, c.level, c.coeffs) for e, c in self.terms.items()))

    def __hash__(self):
        return hash(self.key())

    def leading(self):
        """Lexicographically largest exponent and its coefficient."""
        e = max(self.terms)
        return e, self.terms[e]

    def as_univariate(self, i):
        """Dict: exponent of variable i -> SparsePoly in the other variables."""
        out = {}
        for e, c in self.terms.items():
            rest = list(e)
            k = rest[i]
            rest[i] = 0
            out.setdefault(k, {})[tuple(rest)] = c
        return {k: SparsePoly(self.nvars, t) for k, t in out.items()}

    def order_in(self, i):
        if not self.terms:
            raise ZeroInputError("order of the zero polynomial")
        return min(e[i] for e in self.terms)

    def shift_var(self, i, a):
        """Substitute t_i -> t_i + a."""
        if not a:
            return self
        tower = a.tower
        out = SparsePoly.zero(self.nvars)
        univ = self.as_univariate(i)
        kmax = max(univ)
        apow = [tower.one()]
        for _ in range(kmax):
            apow.append(apow[-1] * a)
        for k, coeff_poly in univ.items():
            row = _pascal_row(tower, k)
            for j in range(k + 1):
                if row[j] == 0:
                    continue
                c = apow[k - j] if row[j] == 1 else tower.from_int(row[j]) * apow[k - j]
                exp = [0] * self.nvars
                exp[i] = j
                out = out + coeff_poly * SparsePoly(self.nvars, {tuple(exp): c})
        return out

    def eval_var(self, i, a):
        """Substitute t_i -> a (a ground element)."""
        out = SparsePoly.zero(self.nvars)
        for k, coeff_poly in self.as_univariate(i).items():
            out = out + (coeff_poly if k == 0 else coeff_poly * (a ** k))
        return out

    def scale_exponent(self, i, e):
        """Substitute t_i -> t_i^e."""
        out = {}
        for exp, c in self.terms.items():
            ne = list(exp)
            ne[i] = ne[i] * e
            out[tuple(ne)] = c
        return SparsePoly(self.nvars, out)

    def reverse_in(self, i, degree=None):
        """Coefficient reversal in t_i: t_i^k -> t_i^(D-k)."""
        if not self.terms:
            return self
        D = self.degree_in(i) if degree is None else degree
        out = {}
        for exp, c in self.terms.items():
            ne = list(exp)
            ne[i] = D - ne[i]
            out[tuple(ne)] = c
        return SparsePoly(self.nvars, out)

    def derivative(self, i):
        out = {}
        for exp, c in self.terms.items():
            k = exp[i]
            if k == 0:
                continue
            kc = c.tower.from_int(k)
            if not kc:
                continue
            ne = list(exp)
            ne[i] = k - 1
            key = tuple(ne)
            val = c * kc
            if key in out:
                s = out[key] + val
                if s:
                    out[key] = s
                else:
                    del out[key]
            else:
                out[key] = val
        return SparsePoly(self.nvars, out)

    def all_exponents_divisible(self, q):
        return all(all(x % q == 0 for x in e) for e in self.terms)

    def pth_root(self, p):
        """Inverse of the Frobenius on polynomials with p-divisible exponents."""
        out = {}
        for exp, c in self.terms.items():
            out[tuple(x // p for x in exp)] = c.pth_root()
        return SparsePoly(self.nvars, out)

    def compose_rat(self, funcs):
        """Substitute variable i -> funcs[i] (RatFuncs); returns a RatFunc."""
        nv = funcs[0].num.nvars if funcs else self.nvars
        result = None
        for exp, c in self.terms.items():
            term = RatFunc(SparsePoly.constant(nv, c), SparsePoly.constant(nv, c.tower.one()))
            for i, k in enumerate(exp):
                if k:
                    term = term * funcs[i] ** k
            result = term if result is None else result + term
        if result is None:
            return RatFunc.zero_of(nv, self._any_tower())
        return result

    def _any_tower(self):
        for c in self.terms.values():
            return c.tower
        raise ValueError("empty polynomial has no tower reference")

    def __repr__(self):
        if not self.terms:
            return "SparsePoly(0)"
        bits = []
        for e, c in sorted(self.terms.items()):
            mono = "*".join("t%d^%d" % (i, k) for i, k in enumerate(e) if k)
            bits.append("%r%s" % (list(c.coeffs), ("*" + mono) if mono else ""))
        return "SparsePoly(%s)" % " + ".join(bits)


class RatFunc:
    """Quotient of sparse polynomials in canonical form.

    The canonical form divides out the common monomial content and scales so
    the denominator's lexicographically leading coefficient is one.  Equality
    is decided exactly by cross multiplication.
    """

    __slots__ = ("num", "den")

    def __init__(self, num, den):
        if den.is_zero():
            raise ZeroDivisionError("rational function with zero denominator")
        if num.is_zero():
            self.num = num
            self.den = SparsePoly.constant(num.nvars, den._any_tower().one())
            return
        # monomial content over numerator and denominator jointly
        nv = num.nvars
        mins = [None] * nv
        for poly in (num, den):
            for e in poly.terms:
                for i, x in enumerate(e):
                    mins[i] = x if mins[i] is None else min(mins[i], x)
        if any(mins):
            def strip(poly):
                return SparsePoly(nv, {
                    tuple(x - m for x, m in zip(e, mins)): c
                    for e, c in poly.terms.items()
                })
            num, den = strip(num), strip(den)
        _, lead = den.leading()
        if not lead.is_one():
            inv = lead.inverse()
            num = num * inv
            den = den * inv
        self.num = num
        self.den = den

    @classmethod
    def zero_of(cls, nvars, tower):
        return cls(SparsePoly.zero(nvars), SparsePoly.constant(nvars, tower.one()))

    @classmethod
    def from_poly(cls, poly, tower):
        return cls(poly, SparsePoly.constant(poly.nvars, tower.one()))

    def is_zero(self):
        return self.num.is_zero()

    def __bool__(self):
        return not self.num.is_zero()

    def is_one(self):
        return self.num == self.den

    def is_constant(self):
        return self.num.is_constant() and self.den.is_constant()

    def constant_value(self, tower):
        return self.num.constant_value(tower) / self.den.constant_value(tower)

    def vars_used(self):
        return self.num.vars_used() | self.den.vars_used()

    def __add__(self, other):
        return RatFunc(self.num * other.den + other.num * self.den, self.den * other.den)

    def __sub__(self, other):
        return RatFunc(self.num * other.den - other.num * self.den, self.den * other.den)

    def __neg__(self):
        return RatFunc(-self.num, self.den)

    def __mul__(self, other):
        if isinstance(other, GroundElem):
            return RatFunc(self.num * other, self.den)
        return RatFunc(self.num * other.num, self.den * other.den)

    def __truediv__(self, other):
        if isinstance(other, GroundElem):
            return RatFunc(self.num, self.den * other)
        if other.is_zero():
            raise ZeroDivisionError("division by the zero function")
        return RatFunc(self.num * other.den, self.den * other.num)

    def inverse(self):
        if self.is_zero():
            raise ZeroDivisionError("inverse of the zero function")
        return RatFunc(self.den, self.num)

    def __pow__(self, e):
        if e < 0:
            return self.inverse() ** (-e)
        nv = self.num.nvars
        tower = self.den._any_tower()
        result = RatFunc.from_poly(SparsePoly.constant(nv, tower.one()), tower)
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def __eq__(self, other):
        if not isinstance(other, RatFunc):
            return NotImplemented
        return self.num * other.den == other.num * self.den

    def __ne__(self, other):
        return not self.__eq__(other)

    def key(self):
        return (self.num.key(), self.den.key())

    def __hash__(self):
        return hash(self.key())

    def derivative(self, i):
        n = self.num.derivative(i) * self.den - self.num * self.den.derivative(i)
        return RatFunc(n, self.den * self.den)

    def compose(self, funcs):
        """Substitute variable i -> funcs[i]."""
        tower = self.den._any_tower()
        num = self.num.compose_rat(funcs) if not self.num.is_zero() else None
        den = self.den.compose_rat(funcs)
        if num is None:
            return RatFunc.zero_of(funcs[0].num.nvars, tower)
        return num / den

    def frobenius_strip(self, p):
        """Remove p-th power structure: returns (g, k) with self = g^(p^k)."""
        g, k = self, 0
        while (not g.is_constant()
               and g.num.all_exponents_divisible(p)
               and g.den.all_exponents_divisible(p)):
            g = RatFunc(g.num.pth_root(p), g.den.pth_root(p))
            k += 1
        return g, k

    def __repr__(self):
        return "RatFunc(%r / %r)" % (self.num, self.den)


# ---------------------------------------------------------------------------
# Coordinate valuations and the rational function field context.
# ---------------------------------------------------------------------------

class CoordValuation:
    """The divisorial valuation t_i = a, or the pole valuation of t_i."""

    __slots__ = ("var", "center", "nvars")

    def __init__(self, var, center, nvars):
        self.var = var
        self.center = center  # GroundElem or INF
        self.nvars = nvars

    @property
    def at_infinity(self):
        return self.center is INF

    def residue_vars(self):
        return frozenset(i for i in range(self.nvars) if i != self.var)

    def __eq__(self, other):
        if not isinstance(other, CoordValuation):
            return NotImplemented
        if self.var != other.var or self.nvars != other.nvars:
            return False
        if self.at_infinity or other.at_infinity:
            return self.at_infinity and other.at_infinity
        return self.center == other.center

    def __hash__(self):
        c = "inf" if self.at_infinity else self.center.compress_key()
        return hash((self.var, c, self.nvars))

    def __repr__(self):
        c = "inf" if self.at_infinity else list(self.center.coeffs)
        return "CoordValuation(t%d = %s)" % (self.var, c)


class FunctionField:
    """The rational function field over the tower in a fixed number of variables."""

    def __init__(self, tower, nvars):
        self.tower = tower
        self.nvars = nvars

    @property
    def p(self):
        return self.tower.p

    def var(self, i):
        if not 0 <= i < self.nvars:
            raise ValueError("variable index out of range")
        return RatFunc.from_poly(
            SparsePoly.variable(self.nvars, i, self.tower.one()), self.tower
        )

    def const(self, c):
        if isinstance(c, int):
            c = self.tower.from_int(c)
        return RatFunc.from_poly(SparsePoly.constant(self.nvars, c), self.tower)

    def zero(self):
        return RatFunc.zero_of(self.nvars, self.tower)

    def one(self):
        return self.const(1)

    def valuation(self, var, center):
        if isinstance(center, int):
            center = self.tower.from_int(center)
        return CoordValuation(var, center, self.nvars)

    def uniformizer(self, v):
        if v.at_infinity:
            return self.one() / self.var(v.var)
        return self.var(v.var) - self.const(v.center)

    def order_and_residue(self, f, v):
        """Order of f at the coordinate valuation v and the residue function.

        The residue is f / pi^n evaluated on the divisor, a nonzero element
        of the residue function field in the remaining variables.  The pole
        valuation is handled by the substitution t_i -> 1/s followed by s = 0.
        """
        if f.is_zero():
            raise ZeroInputError("the zero function has no order")
        i = v.var
        if v.at_infinity:
            num = f.num.reverse_in(i)
            den = f.den.reverse_in(i)
            n = f.den.degree_in(i) - f.num.degree_in(i)
        else:
            num = f.num if v.center.is_zero() else f.num.shift_var(i, v.center)
            den = f.den if v.center.is_zero() else f.den.shift_var(i, v.center)
            n = num.order_in(i) - den.order_in(i)
        rnum = self._strip_and_eval(num, i)
        rden = self._strip_and_eval(den, i)
        return n, RatFunc(rnum, rden)

    def _strip_and_eval(self, poly, i):
        o = poly.order_in(i)
        out = {}
        for e, c in poly.terms.items():
            if e[i] == o:
                ne = list(e)
                ne[i] = 0
                out[tuple(ne)] = c
        return SparsePoly(self.nvars, out)

    def value(self, f, v):
        return self.order_and_residue(f, v)[0]

    def univariate_roots(self, f):
        """All roots of a one-variable polynomial in the closure, with
        multiplicities.  The sum of the multiplicities is the degree."""
        if isinstance(f, RatFunc):
            if not f.den.is_constant():
                raise ValueError("roots of a polynomial, not a fraction")
            f = f.num
        if f.is_zero():
            raise ZeroPolyError("roots of the zero polynomial")
        used = f.vars_used()
        if len(used) > 1:
            raise ValueError("univariate root finding needs one variable")
        if not used:
            return []
        (i,) = used
        level = 1
        for c in f.terms.values():
            level = _lcm(level, c.level)
        self.tower.ensure_level(level)
        dense = [tuple([0] * level) for _ in range(f.degree_in(i) + 1)]
        for e, c in f.terms.items():
            dense[e[i]] = self.tower._lift(c, level).coeffs
        roots = self._dense_roots(dense, level)
        return roots

    def _dense_roots(self, dense, level):
        tw = self.tower
        dense = tw._lp_trim(list(dense))
        distinct = self._distinct_roots(dense, level)
        out = []
        for z in distinct:
            m = self._root_multiplicity(dense, z, level)
            out.append((z.compress(), m))
        return out

    def _distinct_roots(self, dense, level):
        """Distinct roots only; multiplicities are recounted by the caller.

        When the derivative vanishes the polynomial is a p-th power of the
        polynomial with p-th-rooted coefficients, which has the same roots.
        Otherwise the separable part is split, and the gcd with the
        derivative is recursed into so that factors of multiplicity
        divisible by p are not lost."""
        tw = self.tower
        p = tw.p
        dense = tw._lp_trim(list(dense))
        if len(dense) - 1 <= 0:
            return []
        deriv = []
        for k in range(1, len(dense)):
            kc = k % p
            deriv.append(tuple((kc * x) % p for x in dense[k]))
        deriv = tw._lp_trim(deriv)
        if not deriv:
            u = []
            for k in range(0, len(dense), p):
                c = GroundElem(tw, level, dense[k])
                u.append(c.pth_root().coeffs)
            return self._distinct_roots(u, level)
        g = tw._lp_gcd(list(dense), deriv, level)
        sf = tw._lp_divexact(list(dense), g, level)
        roots = list(self._squarefree_roots(sf, level))
        if len(g) - 1 >= 1:
            seen = {z.compress_key() for z in roots}
            for z in self._distinct_roots(g, level):
                if z.compress_key() not in seen:
                    seen.add(z.compress_key())
                    roots.append(z)
        return roots

    def _root_multiplicity(self, dense, z, level):
        tw = self.tower
        lv = _lcm(level, z.level)
        tw.ensure_level(lv)
        zl = tw._lift(z, lv).coeffs
        poly = [tw._lift(GroundElem(tw, level, c), lv).coeffs for c in dense]
        mult = 0
        while True:
            # synthetic division by (x - z)
            q = [tuple([0] * lv)] * (len(poly) - 1)
            carry = tuple([0] * lv)
            for k in range(len(poly) - 1, 0, -1):
                carry = tw._add(lv, poly[k], tw._mul(lv, carry, zl))
                q[k - 1] = carry
            rem = tw._add(lv, poly[0], tw._mul(lv, carry, zl))
            if any(rem):
                return mult
            mult += 1
            poly = q
            if len(poly) == 1:
                # constant quotient: either done or z exhausts the polynomial
                if not any(poly[0]):
                    raise ArithmeticError("degenerate polynomial in multiplicity count")
                return mult

    def _squarefree_roots(self, sf, level):
        """Roots of a squarefree dense polynomial over F_{p^level}."""
        tw = self.tower
        p = tw.p
        q = p ** level
        one = tuple([1] + [0] * (level - 1))
        zero = tuple([0] * level)
        x = [zero, one]
        sf = tw._lp_monic(list(sf), level)
        roots = []
        d = 1
        w = list(x)
        while len(sf) - 1 >= 1:
            if 2 * d > len(sf) - 1:
                # the remaining factor is irreducible
                deg = len(sf) - 1
                roots.extend(self._roots_of_irreducible(sf, level, deg))
                break
            w = tw._lp_powmod(w, q, sf, level)
            gd = tw._lp_gcd(tw._lp_sub(w, x, level), sf, level)
            if len(gd) - 1 > 0:
                for factor in self._equal_degree_split(gd, d, level):
                    roots.extend(self._roots_of_irreducible(factor, level, d))
                sf = tw._lp_divexact(sf, gd, level)
                w = tw._lp_mod(w, sf, level) if len(sf) - 1 >= 1 else w
            d += 1
        return roots

    def _equal_degree_split(self, g, d, level):
        tw = self.tower
        p = tw.p
        q = p ** level
        one = tuple([1] + [0] * (level - 1))
        zero = tuple([0] * level)
        work = [g]
        out = []
        while work:
            h = work.pop()
            if len(h) - 1 == d:
                out.append(h)
                continue
            while True:
                a = tuple(tw.element_from_index(level, tw._rng.randrange(q)).coeffs)
                if p == 2:
                    t = [zero, a]
                    acc = list(t)
                    cur = list(t)
                    for _ in range(level * d - 1):
                        cur = tw._lp_powmod(cur, 2, h, level)
                        n = max(len(acc), len(cur))
                        acc = tw._lp_trim([
                            tw._add(level, u, v)
                            for u, v in zip(acc + [zero] * (n - len(acc)),
                                            cur + [zero] * (n - len(cur)))
                        ])
                    split = acc
                else:
                    split = tw._lp_powmod([a, one], (q ** d - 1) // 2, h, level)
                    split = tw._lp_sub(split, [one], level)
                dd = tw._lp_gcd(split, h, level)
                if 0 < len(dd) - 1 < len(h) - 1:
                    work.append(dd)
                    work.append(tw._lp_divexact(h, dd, level))
                    break
        return out

    def _roots_of_irreducible(self, g, level, d):
        tw = self.tower
        if d == 1:
            gm = tw._lp_monic(list(g), level)
            z = tw._neg(level, gm[0])
            return [GroundElem(tw, level, z)]
        target = level * d
        tw.ensure_level(target)
        glift = [tw._lift(GroundElem(tw, level, c), target).coeffs for c in g]
        z0 = tw._lp_root(glift, target)
        roots = [GroundElem(tw, target, z0)]
        q = tw.p ** level
        cur = roots[0]
        for _ in range(d - 1):
            cur = cur ** q
            roots.append(cur)
        return roots


def univariate_roots(field, f):
    return field.univariate_roots(f)


def order_and_residue(field, f, v):
    return field.order_and_residue(f, v)
