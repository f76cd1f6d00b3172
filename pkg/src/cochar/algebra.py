"""Exact sparse Laurent-polynomial arithmetic and factored rational functions.

All coefficients are Python ints or fractions.Fraction; nothing here ever
touches a float. Torus variables may carry negative exponents, parameter
variables may not.
"""
from __future__ import annotations

import json
from fractions import Fraction
from math import gcd


class VarTableMismatch(ValueError):
    """Two polynomials over different variable tables were combined."""


class InexactDivision(ArithmeticError):
    pass


def _cnorm(c):
    # keep integral values as plain ints: cheaper in hot loops, same exactness
    if type(c) is Fraction and c.denominator == 1:
        return c.numerator
    return c


def parse_rational(s):
    return _cnorm(Fraction(s))


def format_rational(c):
    return str(Fraction(c))


class VarTable:
    """Ordered variable environment.

    Torus variables (kind 'z') come first, then parameters (kinds 't', 'u').
    Exponent tuples used throughout the package are positional against this
    table. Equality is by names and kinds, so two independently built tables
    with the same layout are interchangeable.
    """

    __slots__ = ("names", "kinds", "nz", "index")

    def __init__(self, names, kinds):
        names = tuple(names)
        kinds = tuple(kinds)
        if len(names) != len(kinds):
            raise ValueError("names and kinds must align")
        if len(set(names)) != len(names):
            raise ValueError("duplicate variable name")
        for k in kinds:
            if k not in ("z", "t", "u"):
                raise ValueError("unknown variable kind %r" % (k,))
        nz = kinds.count("z")
        if any(k == "z" for k in kinds[nz:]):
            raise ValueError("torus variables must precede parameters")
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "kinds", kinds)
        object.__setattr__(self, "nz", nz)
        object.__setattr__(self, "index", {nm: i for i, nm in enumerate(names)})

    def __setattr__(self, *a):
        raise AttributeError("VarTable is immutable")

    def __eq__(self, other):
        return (
            isinstance(other, VarTable)
            and self.names == other.names
            and self.kinds == other.kinds
        )

    def __hash__(self):
        return hash((self.names, self.kinds))

    def __repr__(self):
        return "VarTable(%s)" % (",".join(self.names),)

    def __len__(self):
        return len(self.names)

    @classmethod
    def weyl(cls, k, n, m):
        """Torus z1..zk plus n geometric parameters and m sign parameters."""
        names = ["z%d" % (i + 1) for i in range(k)]
        names += ["t"] if n == 1 else ["t%d" % (i + 1) for i in range(n)]
        names += ["u"] if m == 1 else ["u%d" % (i + 1) for i in range(m)]
        kinds = ["z"] * k + ["t"] * n + ["u"] * m
        return cls(names, kinds)

    @classmethod
    def params(cls, n, m):
        return cls.weyl(0, n, m)

    @classmethod
    def of(cls, *pairs):
        """Build from (name, kind) pairs."""
        return cls([p[0] for p in pairs], [p[1] for p in pairs])

    def params_only(self):
        return VarTable(self.names[self.nz:], self.kinds[self.nz:])

    def param_range(self):
        return range(self.nz, len(self.names))

    def zero_exps(self):
        return (0,) * len(self.names)


def grade(exps):
    return sum(exps)


def term_sort_key(exps):
    # graded lexicographic, leading term first
    return (-sum(exps), tuple(-e for e in exps))


def lex_positive(vt, exps):
    """Whether the parameter part of a monomial has positive leading sign.

    Scans parameters in table order; the sign of the first nonzero exponent
    decides. Models |t1| << |t2| << ... << 1 on the integration torus, and
    reduces to deg > 0 whenever a single parameter is involved.
    """
    for i in vt.param_range():
        e = exps[i]
        if e:
            return e > 0
    return False


class LaurentPolynomial:
    """Sparse exact polynomial, Laurent in the torus variables."""

    __slots__ = ("vt", "terms")

    def __init__(self, vt, terms, validate=True):
        self.vt = vt
        if validate:
            clean = {}
            nz = vt.nz
            width = len(vt.names)
            for exps, c in terms.items():
                if len(exps) != width:
                    raise ValueError("exponent tuple of wrong width")
                if any(e < 0 for e in exps[nz:]):
                    raise ValueError("negative parameter exponent")
                c = _cnorm(c)
                if c:
                    clean[tuple(exps)] = c
            self.terms = clean
        else:
            self.terms = terms

    # -- constructors ---------------------------------------------------

    @classmethod
    def zero(cls, vt):
        return cls(vt, {}, validate=False)

    @classmethod
    def const(cls, vt, c):
        c = _cnorm(c)
        if not c:
            return cls.zero(vt)
        return cls(vt, {vt.zero_exps(): c}, validate=False)

    @classmethod
    def monomial(cls, vt, exps, c=1):
        return cls(vt, {tuple(exps): c})

    @classmethod
    def var(cls, vt, name, power=1):
        exps = [0] * len(vt.names)
        exps[vt.index[name]] = power
        return cls(vt, {tuple(exps): 1})

    # -- inspection -----------------------------------------------------

    def is_zero(self):
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def degree(self):
        """Total degree; None for the zero polynomial (minus infinity)."""
        if not self.terms:
            return None
        return max(sum(e) for e in self.terms)

    def var_degree(self, idx):
        if not self.terms:
            return None
        return max(e[idx] for e in self.terms)

    def var_valuation(self, idx):
        if not self.terms:
            return None
        return min(e[idx] for e in self.terms)

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda kv: term_sort_key(kv[0]))

    def constant_term(self):
        return self.terms.get(self.vt.zero_exps(), 0)

    def __eq__(self, other):
        if not isinstance(other, LaurentPolynomial):
            return NotImplemented
        return self.vt == other.vt and self.terms == other.terms

    def __hash__(self):
        raise TypeError("LaurentPolynomial is not hashable")

    # -- ring operations -------------------------------------------------

    def _check(self, other):
        if self.vt != other.vt:
            raise VarTableMismatch(
                "mismatched variable tables: %r vs %r" % (self.vt, other.vt)
            )

    def __add__(self, other):
        self._check(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            s = out.get(e, 0) + c
            if s:
                out[e] = _cnorm(s)
            else:
                out.pop(e, None)
        return LaurentPolynomial(self.vt, out, validate=False)

    def __sub__(self, other):
        self._check(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            s = out.get(e, 0) - c
            if s:
                out[e] = _cnorm(s)
            else:
                out.pop(e, None)
        return LaurentPolynomial(self.vt, out, validate=False)

    def __neg__(self):
        return LaurentPolynomial(
            self.vt, {e: -c for e, c in self.terms.items()}, validate=False
        )

    def __mul__(self, other):
        self._check(other)
        a, b = self.terms, other.terms
        if len(a) > len(b):
            a, b = b, a
        out = {}
        get = out.get
        for e1, c1 in a.items():
            for e2, c2 in b.items():
                e = tuple(map(int.__add__, e1, e2))
                s = get(e, 0) + c1 * c2
                if s:
                    out[e] = s
                else:
                    del out[e]
        for e, c in out.items():
            out[e] = _cnorm(c)
        return LaurentPolynomial(self.vt, out, validate=False)

    def scaled(self, c):
        c = _cnorm(c)
        if not c:
            return LaurentPolynomial.zero(self.vt)
        return LaurentPolynomial(
            self.vt, {e: _cnorm(k * c) for e, k in self.terms.items()}, validate=False
        )

    def mul_monomial(self, exps, c=1):
        """Multiply by c * x^exps; exps may push torus exponents negative."""
        out = {}
        nz = self.vt.nz
        for e, k in self.terms.items():
            ne = tuple(map(int.__add__, e, exps))
            if any(x < 0 for x in ne[nz:]):
                raise ValueError("negative parameter exponent")
            out[ne] = _cnorm(k * c)
        return LaurentPolynomial(self.vt, out, validate=False)

    def __pow__(self, n):
        if n < 0:
            raise ValueError("negative power of a polynomial")
        result = LaurentPolynomial.const(self.vt, 1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base_needed = n >> 1
            if base_needed:
                base = base * base
            n = base_needed
        return result

    # -- substitution and extraction --------------------------------------

    def substitute(self, name, value):
        """Replace a variable by 0 or by a monomial (an LP with one term).

        Rejects substituting 0 into a negative power, and rejects any
        substitution that would create a negative parameter exponent.
        """
        idx = self.vt.index[name]
        out = {}
        if isinstance(value, LaurentPolynomial):
            self._check(value)
            if value.is_zero():
                value = 0
            elif len(value.terms) != 1:
                raise ValueError("substitute requires a monomial or zero value")
        if value == 0:
            for e, c in self.terms.items():
                p = e[idx]
                if p < 0:
                    raise ValueError(
                        "substituting 0 into negative power of %s" % name
                    )
                if p == 0:
                    s = out.get(e, 0) + c
                    if s:
                        out[e] = _cnorm(s)
                    else:
                        out.pop(e, None)
            return LaurentPolynomial(self.vt, out, validate=False)
        ((vexps, vc),) = value.terms.items()
        nz = self.vt.nz
        has_param = any(vexps[nz:])
        for e, c in self.terms.items():
            p = e[idx]
            if p < 0 and has_param:
                raise ValueError(
                    "negative parameter exponent from substituting into %s" % name
                )
            ne = list(e)
            ne[idx] = 0
            for j, ve in enumerate(vexps):
                if ve:
                    ne[j] += ve * p
            if p >= 0:
                nc = c * (vc ** p)
            else:
                nc = c * (Fraction(1, 1) / Fraction(vc) ** (-p))
            ne = tuple(ne)
            s = out.get(ne, 0) + nc
            if s:
                out[ne] = _cnorm(s)
            else:
                out.pop(ne, None)
        return LaurentPolynomial(self.vt, out, validate=False)

    def coefficient_of(self, assignment):
        """Coefficient polynomial for fixed exponents of some variables.

        assignment maps variable name -> exponent; the result lives on the
        same table with those positions zeroed.
        """
        idxs = [(self.vt.index[nm], p) for nm, p in assignment.items()]
        out = {}
        for e, c in self.terms.items():
            if all(e[i] == p for i, p in idxs):
                ne = list(e)
                for i, _ in idxs:
                    ne[i] = 0
                out[tuple(ne)] = c
        return LaurentPolynomial(self.vt, out, validate=False)

    def permuted(self, perm):
        """Relabel positions: new exponent at perm[i] is old exponent at i."""
        out = {}
        for e, c in self.terms.items():
            ne = [0] * len(e)
            for i, x in enumerate(e):
                ne[perm[i]] = x
            out[tuple(ne)] = c
        return LaurentPolynomial(self.vt, out, validate=False)

    def map_to(self, new_vt, rename=None):
        """Re-express over another table; variables map by (renamed) name.

        Every variable carrying a nonzero exponent must exist in the target.
        """
        rename = rename or {}
        pos = []
        for i, nm in enumerate(self.vt.names):
            nm = rename.get(nm, nm)
            pos.append(new_vt.index.get(nm, -1))
        width = len(new_vt.names)
        out = {}
        for e, c in self.terms.items():
            ne = [0] * width
            for i, x in enumerate(e):
                if x:
                    j = pos[i]
                    if j < 0:
                        raise ValueError(
                            "variable %s not present in target table"
                            % self.vt.names[i]
                        )
                    ne[j] += x
            ne = tuple(ne)
            s = out.get(ne, 0) + c
            if s:
                out[ne] = _cnorm(s)
            else:
                out.pop(ne, None)
        return LaurentPolynomial(new_vt, out, validate=False)

    def derivative(self, name):
        idx = self.vt.index[name]
        out = {}
        for e, c in self.terms.items():
            p = e[idx]
            if p == 0:
                continue
            ne = list(e)
            ne[idx] = p - 1
            out[tuple(ne)] = _cnorm(c * p)
        return LaurentPolynomial(self.vt, out, validate=False)

    def int_content(self):
        """gcd of all coefficients when they are integers, else 1."""
        g = 0
        for c in self.terms.values():
            if type(c) is not int:
                return 1
            g = gcd(g, c)
            if g == 1:
                return 1
        return g or 1

    # -- exact division ----------------------------------------------------

    def exact_div(self, other):
        """Exact quotient self/other, or None when the division is inexact."""
        self._check(other)
        if other.is_zero():
            raise ZeroDivisionError("division by zero polynomial")
        if self.is_zero():
            return LaurentPolynomial.zero(self.vt)
        q = _div_terms(self.terms, other.terms, self.vt)
        if q is None:
            return None
        return LaurentPolynomial(self.vt, q, validate=False)

    def divided_by(self, other):
        q = self.exact_div(other)
        if q is None:
            raise InexactDivision("polynomial division left a remainder")
        return q

    # -- serialization ------------------------------------------------------

    def to_obj(self):
        return {
            "vars": list(self.vt.names),
            "kinds": list(self.vt.kinds),
            "terms": [
                {"coeff": format_rational(c), "exps": list(e)}
                for e, c in self.sorted_terms()
            ],
        }

    def to_json(self):
        return json.dumps(self.to_obj(), separators=(",", ":"))

    @classmethod
    def from_obj(cls, obj):
        names = obj["vars"]
        kinds = obj.get("kinds") or [nm[0] for nm in names]
        vt = VarTable(names, kinds)
        terms = {
            tuple(t["exps"]): parse_rational(t["coeff"]) for t in obj["terms"]
        }
        return cls(vt, terms)

    @classmethod
    def from_json(cls, s):
        return cls.from_obj(json.loads(s))

    def __str__(self):
        if not self.terms:
            return "0"
        bits = []
        # ascending grade reads like a series
        for e, c in sorted(
            self.terms.items(), key=lambda kv: (sum(kv[0]), tuple(kv[0]))
        ):
            names = self.vt.names
            factors = []
            for i, p in enumerate(e):
                if p == 1:
                    factors.append(names[i])
                elif p:
                    factors.append("%s^%d" % (names[i], p))
            body = "*".join(factors)
            if not body:
                piece = format_rational(c)
            elif c == 1:
                piece = body
            elif c == -1:
                piece = "-" + body
            else:
                piece = format_rational(c) + "*" + body
            bits.append(piece)
        s = " + ".join(bits)
        return s.replace("+ -", "- ")

    def __repr__(self):
        return "LP(%s)" % (self,)


def _div_terms(p, q, vt, banned=-1):
    """Recursive exact division of term dicts; None when inexact."""
    if len(q) == 1:
        ((qe, qc),) = q.items()
        nz = vt.nz
        out = {}
        for e, c in p.items():
            ne = tuple(map(int.__sub__, e, qe))
            if any(x < 0 for x in ne[nz:]):
                return None
            val = Fraction(c, qc) if (type(c) is int and type(qc) is int) else (
                Fraction(c) / Fraction(qc)
            )
            out[ne] = _cnorm(val)
        return out
    # pivot: first variable where q has an exponent spread
    width = len(vt.names)
    x = None
    for i in range(width):
        lo = min(e[i] for e in q)
        hi = max(e[i] for e in q)
        if lo != hi:
            x = i
            break
    if x is None:
        # q has >= 2 terms all with identical exponents: impossible post-clean
        raise AssertionError("unnormalized divisor")
    qd = max(e[x] for e in q)
    qv = min(e[x] for e in q)
    q_lead = {e: c for e, c in q.items() if e[x] == qd}
    pv = min(e[x] for e in p)
    low_bound = pv - qv
    if vt.kinds[x] != "z" and low_bound < 0:
        return None
    r = dict(p)
    out = {}
    while r:
        rd = max(e[x] for e in r)
        if rd - qd < low_bound:
            return None
        r_top = {e: c for e, c in r.items() if e[x] == rd}
        piece = _div_terms(r_top, q_lead, vt)
        if piece is None:
            return None
        # subtract piece*q from r
        for e1, c1 in piece.items():
            oe = out.get(e1, 0) + c1
            if oe:
                out[e1] = _cnorm(oe)
            else:
                out.pop(e1, None)
            for e2, c2 in q.items():
                e = tuple(map(int.__add__, e1, e2))
                s = r.get(e, 0) - c1 * c2
                if s:
                    r[e] = _cnorm(s)
                else:
                    r.pop(e, None)
    return out


# -- denominator factor grammar -------------------------------------------
#
# Factors are plain tuples so they can key a dict:
#   ("zm", i)            the torus variable z_i
#   ("pm", j)            the parameter variable at position j
#   ("zb", i, Mi, j, Mj) Mi*z_i - Mj*z_j with i < j, Mi/Mj coprime monic
#                        parameter monomials (full-width exponent tuples)
#   ("pb", M)            1 - M for a nonzero parameter monomial M
#   ("pd", M1, M2)       M1 - M2, coprime, neither equal to 1


def factor_to_poly(vt, f):
    tag = f[0]
    width = len(vt.names)
    if tag == "zm":
        e = [0] * width
        e[f[1]] = 1
        return LaurentPolynomial(vt, {tuple(e): 1}, validate=False)
    if tag == "pm":
        e = [0] * width
        e[f[1]] = 1
        return LaurentPolynomial(vt, {tuple(e): 1}, validate=False)
    if tag == "zb":
        _, i, mi, j, mj = f
        e1 = list(mi)
        e1[i] += 1
        e2 = list(mj)
        e2[j] += 1
        return LaurentPolynomial(
            vt, {tuple(e1): 1, tuple(e2): -1}, validate=False
        )
    if tag == "pb":
        return LaurentPolynomial(
            vt, {vt.zero_exps(): 1, tuple(f[1]): -1}, validate=False
        )
    if tag == "pd":
        return LaurentPolynomial(
            vt, {tuple(f[1]): 1, tuple(f[2]): -1}, validate=False
        )
    raise ValueError("unknown factor tag %r" % (tag,))


def factor_degree(f):
    if f[0] in ("zm", "pm"):
        return 1
    if f[0] == "zb":
        return 1 + max(sum(f[2]), sum(f[4]))
    if f[0] == "pb":
        return sum(f[1])
    return max(sum(f[1]), sum(f[2]))


def factor_sort_key(f):
    # deterministic processing order: big factors first, then structural
    return (-factor_degree(f), f)


def _strip_gcd(a, b):
    g = tuple(map(min, a, b))
    if any(g):
        a = tuple(map(int.__sub__, a, g))
        b = tuple(map(int.__sub__, b, g))
    return g, a, b


def _monomial_factors(vt, exps, out):
    for i, e in enumerate(exps):
        if e:
            tag = "zm" if vt.kinds[i] == "z" else "pm"
            out[(tag, i)] = out.get((tag, i), 0) + e


def make_param_binomial(vt, a, b, out, mult=1):
    """Fold the factor (x^a - x^b) into a factor multiset; returns the sign.

    a and b are full-width parameter exponent tuples. The common monomial
    goes in as pm factors; the remaining difference becomes a pb (one side
    trivial) or pd factor. Zero differences are a caller bug.
    """
    g, a, b = _strip_gcd(a, b)
    sign = 1
    for i, e in enumerate(g):
        if e:
            out[("pm", i)] = out.get(("pm", i), 0) + e * mult
    if a == b:
        raise AssertionError("vanishing parameter factor")
    if not any(a):
        # (1 - x^b)
        out[("pb", b)] = out.get(("pb", b), 0) + mult
        return sign
    if not any(b):
        out[("pb", a)] = out.get(("pb", a), 0) + mult
        sign = -1 if mult % 2 else 1
        return sign
    if (sum(a), a) < (sum(b), b):
        a, b = b, a
        sign = -1 if mult % 2 else 1
    out[("pd", a, b)] = out.get(("pd", a, b), 0) + mult
    return sign


def make_zbinomial(vt, i, mi, j, mj, out, mult=1):
    """Fold (x^mi*z_i - x^mj*z_j) into a factor multiset; returns the sign."""
    g, mi, mj = _strip_gcd(mi, mj)
    for p, e in enumerate(g):
        if e:
            out[("pm", p)] = out.get(("pm", p), 0) + e * mult
    if i == j:
        out[("zm", i)] = out.get(("zm", i), 0) + mult
        return make_param_binomial(vt, mi, mj, out, mult)
    sign = 1
    if i > j:
        i, mi, j, mj = j, mj, i, mi
        sign = -1 if mult % 2 else 1
    f = ("zb", i, tuple(mi), j, tuple(mj))
    out[f] = out.get(f, 0) + mult
    return sign


class FactoredRational:
    """numer / (scale_den * product of factors).

    The numerator is expanded; the denominator is kept as a factor multiset
    in the restricted grammar above, which is what makes pole detection and
    exact cancellation cheap. scale_den is a positive integer absorbing
    normalizations so that engine numerators stay integral.
    """

    __slots__ = ("vt", "numer", "denom", "scale_den")

    def __init__(self, vt, numer, denom=None, scale_den=1):
        self.vt = vt
        self.numer = numer
        self.denom = dict(denom) if denom else {}
        if scale_den <= 0:
            raise ValueError("scale_den must be positive")
        self.scale_den = scale_den

    @classmethod
    def from_poly(cls, p):
        return cls(p.vt, p)

    def copy(self):
        return FactoredRational(self.vt, self.numer, dict(self.denom), self.scale_den)

    def is_zero(self):
        return self.numer.is_zero()

    def denominator_poly(self):
        d = LaurentPolynomial.const(self.vt, self.scale_den)
        for f, mult in sorted(self.denom.items(), key=lambda kv: factor_sort_key(kv[0])):
            d = d * (factor_to_poly(self.vt, f) ** mult)
        return d

    def as_pair(self):
        return self.numer, self.denominator_poly()

    def equals(self, other):
        """Equality as rational functions, by cross multiplication."""
        n1, d1 = self.as_pair()
        n2, d2 = other.as_pair()
        return n1 * d2 == n2 * d1

    def mul_poly(self, p):
        return FactoredRational(self.vt, self.numer * p, self.denom, self.scale_den)

    def add(self, other):
        if self.vt != other.vt:
            raise VarTableMismatch("mismatched variable tables")
        if self.is_zero():
            return other.copy()
        if other.is_zero():
            return self.copy()
        union = dict(self.denom)
        for f, m in other.denom.items():
            if union.get(f, 0) < m:
                union[f] = m
        lcm_scale = self.scale_den * other.scale_den // gcd(self.scale_den, other.scale_den)
        n1 = self.numer.scaled(lcm_scale // self.scale_den)
        n2 = other.numer.scaled(lcm_scale // other.scale_den)
        for f, m in sorted(union.items(), key=lambda kv: factor_sort_key(kv[0])):
            fp = factor_to_poly(self.vt, f)
            need1 = m - self.denom.get(f, 0)
            need2 = m - other.denom.get(f, 0)
            if need1:
                n1 = n1 * fp ** need1
            if need2:
                n2 = n2 * fp ** need2
        return FactoredRational(self.vt, n1 + n2, union, lcm_scale)

    def simplify(self):
        """Cancel denominator factors into the numerator where exact."""
        if self.numer.is_zero():
            return FactoredRational(self.vt, self.numer)
        numer = self.numer
        denom = dict(self.denom)
        # monomial factors cancel against the numerator's valuation
        for f in list(denom):
            if f[0] in ("zm", "pm"):
                idx = f[1]
                v = numer.var_valuation(idx)
                r = min(denom[f], v)
                if r > 0:
                    shift = [0] * len(self.vt.names)
                    shift[idx] = -r
                    numer = numer.mul_monomial(tuple(shift))
                    denom[f] -= r
                    if not denom[f]:
                        del denom[f]
        for f in sorted(denom, key=factor_sort_key):
            if f[0] in ("zm", "pm"):
                # handled above; division would only shuffle the monomial
                # into negative numerator exponents and hide the pole
                continue
            fp = factor_to_poly(self.vt, f)
            while denom.get(f, 0) > 0:
                q = numer.exact_div(fp)
                if q is None:
                    break
                numer = q
                denom[f] -= 1
            if denom.get(f) == 0:
                del denom[f]
        scale = self.scale_den
        g = gcd(numer.int_content(), scale)
        if g > 1:
            numer = numer.scaled(Fraction(1, g))
            scale //= g
        return FactoredRational(self.vt, numer, denom, scale)

    def differentiate(self, name):
        """Quotient-rule derivative; factor multiplicities grow by at most 1."""
        idx = self.vt.index[name]
        vt = self.vt
        involved = []
        for f, m in self.denom.items():
            if f[0] == "zm" and f[1] == idx:
                involved.append((f, m, LaurentPolynomial.const(vt, 1)))
            elif f[0] == "zb" and (f[1] == idx or f[3] == idx):
                if f[1] == idx:
                    d = LaurentPolynomial.monomial(vt, f[2], 1)
                else:
                    d = LaurentPolynomial.monomial(vt, f[4], -1)
                involved.append((f, m, d))
        dn = self.numer.derivative(name)
        if not involved:
            return FactoredRational(vt, dn, self.denom, self.scale_den)
        prod_all = LaurentPolynomial.const(vt, 1)
        for f, _, _ in involved:
            prod_all = prod_all * factor_to_poly(vt, f)
        total = dn * prod_all
        for i, (f, m, dfac) in enumerate(involved):
            rest = LaurentPolynomial.const(vt, m)
            for jj, (f2, _, _) in enumerate(involved):
                if jj != i:
                    rest = rest * factor_to_poly(vt, f2)
            total = total - self.numer * dfac * rest
        denom = dict(self.denom)
        for f, m, _ in involved:
            denom[f] = m + 1
        return FactoredRational(vt, total, denom, self.scale_den)

    def to_obj(self):
        def fobj(f):
            if f[0] in ("zm", "pm"):
                return {"kind": f[0], "var": self.vt.names[f[1]]}
            if f[0] == "zb":
                return {
                    "kind": "zb",
                    "var1": self.vt.names[f[1]],
                    "mono1": list(f[2]),
                    "var2": self.vt.names[f[3]],
                    "mono2": list(f[4]),
                }
            if f[0] == "pb":
                return {"kind": "pb", "mono": list(f[1])}
            return {"kind": "pd", "mono1": list(f[1]), "mono2": list(f[2])}

        return {
            "numer": self.numer.to_obj(),
            "denom": [
                {"factor": fobj(f), "mult": m}
                for f, m in sorted(self.denom.items(), key=lambda kv: factor_sort_key(kv[0]))
            ],
            "scale_den": self.scale_den,
        }

    def __repr__(self):
        return "FR(%s | %d factors | /%d)" % (
            self.numer,
            sum(self.denom.values()),
            self.scale_den,
        )
