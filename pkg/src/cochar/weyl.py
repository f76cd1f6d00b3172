"""Torus inner products, computed two independent ways.

The closed-form path runs iterated symbolic residues over the torus
variables, keeping denominators factored the whole way. The oracle path
expands everything as a truncated power series in the parameters and takes
the z-constant term. They must agree; the oracle is the adjudicator.
"""
from __future__ import annotations

import json
import os
from fractions import Fraction
from math import comb, factorial, gcd

from .algebra import (
    FactoredRational,
    LaurentPolynomial as LP,
    VarTable,
    factor_sort_key,
    factor_to_poly,
    lex_positive,
    make_zbinomial,
)


class EngineError(Exception):
    pass


class OnTorusPoleError(EngineError):
    """A denominator factor pins a pole onto the integration torus."""


class SeriesTruncation:
    """Total-degree cutoff in the parameters; coefficients up to D exact."""

    __slots__ = ("degree",)

    def __init__(self, degree):
        if degree < 0:
            raise ValueError("truncation degree must be >= 0")
        self.degree = degree


def vandermonde_weight(vt):
    """prod over ordered pairs i != j of (1 - z_i/z_j), expanded."""
    w = LP.const(vt, 1)
    width = len(vt.names)
    for i in range(vt.nz):
        for j in range(vt.nz):
            if i == j:
                continue
            e = [0] * width
            e[i], e[j] = 1, -1
            w = w * LP(vt, {vt.zero_exps(): 1, tuple(e): -1}, validate=False)
    return w


class InnerProductProblem:
    """An integrand over VarTable(k; n; m) awaiting averaging over the torus.

    param_prefactor holds torus-free polynomial factors kept out of the
    working numerator so they never inflate the residue arithmetic; they are
    multiplied back in at the end (both paths).
    """

    def __init__(self, integrand, param_prefactor=()):
        self.integrand = integrand
        self.k = integrand.vt.nz
        self.normalization = Fraction(1, factorial(self.k))
        self.param_prefactor = tuple(param_prefactor)
        for p in self.param_prefactor:
            for e in p.terms:
                if any(e[: integrand.vt.nz]):
                    raise ValueError("prefactor must be torus-free")

    def prefactor_poly(self):
        out = LP.const(self.integrand.vt, 1)
        for p in self.param_prefactor:
            out = out * p
        return out

    def check_symmetry(self, degree=2):
        """Exact low-order expansion must be invariant under z-swaps."""
        base = _expand_full(self, degree)
        k = self.k
        width = len(self.integrand.vt.names)
        for a in range(k - 1):
            perm = list(range(width))
            perm[a], perm[a + 1] = perm[a + 1], perm[a]
            swapped = {}
            for e, c in base.items():
                ne = [0] * width
                for i, x in enumerate(e):
                    ne[perm[i]] = x
                swapped[tuple(ne)] = c
            if swapped != base:
                return False
        return True


# ---------------------------------------------------------------------------
# residue engine


def normalize_torus(fr, idx):
    """Move negative powers of one torus variable into the denominator."""
    v = fr.numer.var_valuation(idx)
    if v is None or v >= 0:
        return fr
    shift = [0] * len(fr.vt.names)
    shift[idx] = -v
    numer = fr.numer.mul_monomial(tuple(shift))
    denom = dict(fr.denom)
    denom[("zm", idx)] = denom.get(("zm", idx), 0) - v
    return FactoredRational(fr.vt, numer, denom, fr.scale_den)


def restore_params(fr):
    """Clear transient negative parameter exponents out of the numerator."""
    vt = fr.vt
    shift = [0] * len(vt.names)
    dirty = False
    for j in vt.param_range():
        v = fr.numer.var_valuation(j)
        if v is not None and v < 0:
            shift[j] = -v
            dirty = True
    if not dirty:
        return fr
    numer = fr.numer.mul_monomial(tuple(shift))
    denom = dict(fr.denom)
    for j, s in enumerate(shift):
        if s:
            denom[("pm", j)] = denom.get(("pm", j), 0) + s
    return FactoredRational(vt, numer, denom, fr.scale_den)


def poles_inside(fr, zname):
    """Poles of one torus variable lying inside the integration contour.

    Origin poles are always inside. A solved pole z = c*z_other is inside
    exactly when c is lexicographically small in the parameters (first
    nonzero exponent positive), the formal version of |c| < 1 = |z_other|.
    Returns [("origin", mult)] + [("shift", dexps, other, mult, factor)].
    """
    vt = fr.vt
    idx = vt.index[zname]
    origin = 0
    shifts = []
    for f, mult in fr.denom.items():
        tag = f[0]
        if tag == "zm":
            if f[1] == idx:
                origin += mult
            continue
        if tag != "zb":
            continue
        _, i, mi, j, mj = f
        if idx == i:
            other, d = j, tuple(map(int.__sub__, mj, mi))
        elif idx == j:
            other, d = i, tuple(map(int.__sub__, mi, mj))
        else:
            continue
        if not any(d):
            raise OnTorusPoleError(
                "uncancelled on-torus factor between %s and %s"
                % (vt.names[i], vt.names[j])
            )
        if lex_positive(vt, d):
            shifts.append(("shift", d, other, mult, f))
    shifts.sort(key=lambda p: (p[2], p[1]))
    out = []
    if origin:
        out.append(("origin", origin))
    return out + shifts


def _inverse_series(vt, f, idx, e, cap):
    """(factor)^-e as a z_idx-power series up to degree cap, one LP.

    The factor is a zb involving z_idx; the expansion point is z_idx = 0,
    where the factor is dominated by its other-variable side.
    """
    _, i, mi, j, mj = f
    if i == idx:
        b, ma, mb, sign = j, mi, mj, (-1) ** e
    else:
        b, ma, mb, sign = i, mj, mi, 1
    width = len(vt.names)
    ratio = tuple(map(int.__sub__, ma, mb))
    terms = {}
    for r in range(cap + 1):
        exps = [0] * width
        exps[idx] = r
        exps[b] = -e - r
        for p, x in enumerate(ratio):
            if x:
                exps[p] += r * x
        for p, x in enumerate(mb):
            if x:
                exps[p] -= e * x
        terms[tuple(exps)] = sign * comb(r + e - 1, e - 1)
    return LP(vt, terms, validate=False)


def _mul_truncated(a, b, idx, cap):
    """Product of term dicts, discarding z_idx-degrees above cap."""
    out = {}
    get = out.get
    for e1, c1 in a.items():
        d1 = e1[idx]
        for e2, c2 in b.items():
            if d1 + e2[idx] > cap:
                continue
            e = tuple(map(int.__add__, e1, e2))
            s = get(e, 0) + c1 * c2
            if s:
                out[e] = s
            else:
                del out[e]
    return out


def _residue_origin(fr, idx, mult):
    """Residue at z=0 of order mult, by truncated series inversion.

    Avoids the derivative formula entirely: the answer is the coefficient
    of z^(mult-1) in the numerator times the inverted z-involving factors.
    """
    vt = fr.vt
    cap = mult - 1
    work = {e: c for e, c in fr.numer.terms.items() if 0 <= e[idx] <= cap}
    denom = {}
    for f, e in fr.denom.items():
        if f[0] == "zm" and f[1] == idx:
            continue
        if f[0] == "zb" and idx in (f[1], f[3]):
            inv = _inverse_series(vt, f, idx, e, cap)
            work = _mul_truncated(work, inv.terms, idx, cap)
            continue
        denom[f] = e
    out = {}
    for e, c in work.items():
        if e[idx] == cap:
            ne = list(e)
            ne[idx] = 0
            out[tuple(ne)] = c
    numer = LP(vt, out, validate=False)
    res = FactoredRational(vt, numer, denom, fr.scale_den)
    return restore_params(res).simplify()


def _apply_shift(fr, idx, d, other):
    """Substitute z_idx <- x^d * z_other through a whole FactoredRational."""
    vt = fr.vt
    width = len(vt.names)
    numer = {}
    for e, c in fr.numer.terms.items():
        p = e[idx]
        ne = list(e)
        ne[idx] = 0
        ne[other] += p
        if p:
            for q, x in enumerate(d):
                if x:
                    ne[q] += p * x
        ne = tuple(ne)
        s = numer.get(ne, 0) + c
        if s:
            numer[ne] = s
        else:
            del numer[ne]
    sign = 1
    credit = [0] * width
    denom = {}

    def add_pm(vec, e):
        for q, x in enumerate(vec):
            xq = x * e
            if xq > 0:
                denom[("pm", q)] = denom.get(("pm", q), 0) + xq
            elif xq < 0:
                credit[q] -= xq

    for f, e in fr.denom.items():
        tag = f[0]
        if tag == "zm" and f[1] == idx:
            add_pm(d, e)
            denom[("zm", other)] = denom.get(("zm", other), 0) + e
            continue
        if tag == "zb" and idx in (f[1], f[3]):
            _, i, mi, j, mj = f
            if i == idx:
                va, aa = other, tuple(x + y for x, y in zip(mi, d))
                vb, bb = j, mj
            else:
                va, aa = i, mi
                vb, bb = other, tuple(x + y for x, y in zip(mj, d))
            low = tuple(min(a, b, 0) for a, b in zip(aa, bb))
            if any(low):
                aa = tuple(a - l for a, l in zip(aa, low))
                bb = tuple(b - l for b, l in zip(bb, low))
                add_pm(low, e)
            s = make_zbinomial(vt, va, aa, vb, bb, denom, e)
            sign *= s
            continue
        denom[f] = denom.get(f, 0) + e

    if any(credit):
        # terms may still hold transient negative parameter exponents, so
        # shift by hand instead of going through the validating helper
        numer = {
            tuple(a + b for a, b in zip(e, credit)): c for e, c in numer.items()
        }
    np = LP(vt, numer, validate=False)
    if sign < 0:
        np = -np
    return FactoredRational(vt, np, denom, fr.scale_den)


def _residue_shift(fr, idx, pole):
    _, d, other, mult, f0 = pole
    vt = fr.vt
    g_denom = dict(fr.denom)
    del g_denom[f0]
    # the active side's monomial coefficient scales the pole factor
    ma = f0[2] if f0[1] == idx else f0[4]
    numer = fr.numer
    if f0[3] == idx:
        # factor is (m z_other - ma z_idx) = -(ma z_idx - m z_other)
        if mult % 2:
            numer = -numer
    scale = fr.scale_den
    if any(ma):
        for q, x in enumerate(ma):
            if x:
                g_denom[("pm", q)] = g_denom.get(("pm", q), 0) + x * mult
    g = FactoredRational(vt, numer, g_denom, scale)
    if mult > 1:
        for _ in range(mult - 1):
            g = g.differentiate(vt.names[idx])
        g = FactoredRational(vt, g.numer, g.denom, g.scale_den * factorial(mult - 1))
    res = _apply_shift(g, idx, d, other)
    return restore_params(res).simplify()


def residue_at(fr, zname, pole):
    """Residue of fr at one pole of z, as a rational free of that variable."""
    idx = fr.vt.index[zname]
    if pole[0] == "origin":
        return _residue_origin(fr, idx, pole[1])
    return _residue_shift(fr, idx, pole)


def _eliminate(fr, zname):
    idx = fr.vt.index[zname]
    fr = normalize_torus(fr, idx).simplify()
    fr = normalize_torus(fr, idx)
    out = []
    for pole in poles_inside(fr, zname):
        r = residue_at(fr, zname, pole)
        if not r.is_zero():
            out.append(r)
    return out


def _greedy_cyclotomic_split(vt, denom_poly):
    """Factor a parameter polynomial as const * prod (1 - M)^e, greedily.

    Trial-divides by (1 - M) over candidate monomials M in descending
    total-degree order. Raises EngineError when a non-constant core remains.
    """
    factors = {}
    rest = denom_poly
    deg = rest.degree()
    width = len(vt.names)
    pidx = list(vt.param_range())
    cands = []

    def gen(pos, left, cur):
        if pos == len(pidx):
            if any(cur):
                cands.append(tuple(cur))
            return
        for v in range(left + 1):
            cur[pos] = v
            gen(pos + 1, left - v, cur)
        cur[pos] = 0

    gen(0, deg or 0, [0] * len(pidx))
    cands.sort(key=lambda m: (-sum(m), m))
    for m in cands:
        exps = [0] * width
        for p, x in zip(pidx, m):
            exps[p] = x
        binom = LP(vt, {vt.zero_exps(): 1, tuple(exps): -1}, validate=False)
        while True:
            q = rest.exact_div(binom)
            if q is None:
                break
            rest = q
            factors[tuple(exps)] = factors.get(tuple(exps), 0) + 1
        if rest.degree() == 0:
            break
    if rest.degree() != 0:
        raise EngineError("final denominator is not a product of (1 - M) factors")
    return factors, rest.constant_term()


class ClosedFormSeries:
    """numerator / prod (1 - M)^mult over a parameters-only table."""

    __slots__ = ("vt", "numer", "denom")

    def __init__(self, vt, numer, denom):
        if vt.nz:
            raise ValueError("closed-form series lives on parameters only")
        self.vt = vt
        self.numer = numer
        self.denom = dict(denom)
        for m, e in self.denom.items():
            if not any(m) or e <= 0:
                raise ValueError("denominator factors must be (1-M), M nonzero")

    def denominator_poly(self):
        d = LP.const(self.vt, 1)
        for m, e in sorted(self.denom.items()):
            binom = LP(self.vt, {self.vt.zero_exps(): 1, m: -1}, validate=False)
            d = d * binom ** e
        return d

    def equals(self, other):
        if self.vt != other.vt:
            return False
        return self.numer * other.denominator_poly() == other.numer * self.denominator_poly()

    def expand(self, degree):
        """Exact power-series coefficients to total degree <= degree."""
        acc = {e: c for e, c in self.numer.terms.items() if sum(e) <= degree}
        for m, e in sorted(self.denom.items()):
            md = sum(m)
            series = {}
            r = 0
            while r * md <= degree:
                series[tuple(x * r for x in m)] = comb(r + e - 1, e - 1)
                r += 1
            nxt = {}
            for e1, c1 in acc.items():
                d1 = sum(e1)
                for e2, c2 in series.items():
                    if d1 + sum(e2) > degree:
                        continue
                    key = tuple(map(int.__add__, e1, e2))
                    s = nxt.get(key, 0) + c1 * c2
                    if s:
                        nxt[key] = s
                    else:
                        del nxt[key]
            acc = nxt
        return acc

    def coefficient(self, exps):
        return self.expand(sum(exps)).get(tuple(exps), 0)

    def specialize_zero(self, name):
        """Set one parameter to zero, dropping denominators it rode in."""
        idx = self.vt.index[name]
        numer = self.numer.substitute(name, 0)
        denom = {}
        for m, e in self.denom.items():
            if m[idx]:
                continue
            denom[m] = e
        return ClosedFormSeries(self.vt, numer, denom)

    def to_obj(self):
        return {
            "numer": self.numer.to_obj(),
            "denom": [
                {"mono": list(m), "mult": e} for m, e in sorted(self.denom.items())
            ],
        }

    @classmethod
    def from_obj(cls, obj):
        numer = LP.from_obj(obj["numer"])
        denom = {tuple(d["mono"]): d["mult"] for d in obj["denom"]}
        return cls(numer.vt, numer, denom)

    def __str__(self):
        num = str(self.numer)
        if not self.denom:
            return num
        bits = []
        for m, e in sorted(self.denom.items()):
            names = self.vt.names
            body = "*".join(
                names[i] if x == 1 else "%s^%d" % (names[i], x)
                for i, x in enumerate(m)
                if x
            )
            piece = "(1 - %s)" % body
            if e > 1:
                piece += "^%d" % e
            bits.append(piece)
        return "(%s) / (%s)" % (num, "".join(bits))


def _finalize(fr, problem):
    """Collapse a torus-free FactoredRational into a ClosedFormSeries."""
    vt = fr.vt
    fr = restore_params(fr).simplify()
    for i in range(vt.nz):
        v = fr.numer.var_degree(i)
        if v or fr.numer.var_valuation(i):
            raise EngineError("torus variable %s survived elimination" % vt.names[i])
    for f in fr.denom:
        if f[0] in ("zm", "zb"):
            raise EngineError("torus factor survived elimination")
    denom_poly = fr.denominator_poly()
    factors, const = _greedy_cyclotomic_split(vt, denom_poly)
    numer = fr.numer * problem.prefactor_poly()
    if const != 1:
        numer = numer.scaled(Fraction(1, const))
    # re-reduce against the canonical factor list
    for m in sorted(factors, key=lambda m: (-sum(m), m)):
        binom = LP(vt, {vt.zero_exps(): 1, m: -1}, validate=False)
        while factors.get(m, 0) > 0:
            q = numer.exact_div(binom)
            if q is None:
                break
            numer = q
            factors[m] -= 1
        if factors.get(m) == 0:
            del factors[m]
    pt = vt.params_only()
    return ClosedFormSeries(pt, numer.map_to(pt), {
        tuple(m[i] for i in vt.param_range()): e for m, e in factors.items()
    })


def inner_product_residue(problem, order=None, dump_dir=None):
    """The averaged value of the integrand, by iterated residues.

    Exact; independent of the elimination order; includes the 1/k!
    normalization. dump_dir, when set, receives each stage's branch list
    as JSON for debugging.
    """
    f = problem.integrand
    vt = f.vt
    k = vt.nz
    if order is None:
        order = list(vt.names[:k])
    if sorted(order) != sorted(vt.names[:k]):
        raise ValueError("elimination order must cover the torus variables")
    work = f.mul_poly(vandermonde_weight(vt))
    denom = dict(work.denom)
    for i in range(k):
        denom[("zm", i)] = denom.get(("zm", i), 0) + 1
    work = FactoredRational(vt, work.numer, denom, work.scale_den * factorial(k))
    branches = [work]
    for stage, zname in enumerate(order, start=1):
        nxt = []
        for br in branches:
            nxt.extend(_eliminate(br, zname))
        branches = nxt
        if dump_dir:
            os.makedirs(dump_dir, exist_ok=True)
            path = os.path.join(dump_dir, "stage%d.json" % stage)
            with open(path, "w") as fh:
                json.dump([b.to_obj() for b in branches], fh, indent=1)
        if not branches:
            break
    if not branches:
        pt = vt.params_only()
        return ClosedFormSeries(pt, LP.zero(pt), {})
    total = branches[0]
    for br in branches[1:]:
        total = total.add(br)
    return _finalize(total.simplify(), problem)


# ---------------------------------------------------------------------------
# constant-term oracle


def _updown(exps, nz):
    up = 0
    down = 0
    for i in range(nz):
        x = exps[i]
        if x > 0:
            up += x
        elif x < 0:
            down -= x
    return up, down


def _prunable(e, nz, pbudget, free_down):
    """Whether a term can no longer reach z-constant within budget.

    Raising any z-exponent costs at least one parameter unit, so the
    negative displacement must fit in the budget. Lowering can ride the
    mandatory z-drops of unprocessed factors (free_down) before it starts
    costing parameters too.
    """
    up, down = _updown(e, nz)
    return down > pbudget or up > pbudget + free_down


def _expand_full(problem, degree):
    """Truncated expansion of the bare integrand, z-exponents kept."""
    fr = problem.integrand
    vt = fr.vt
    nz = vt.nz
    acc = dict(fr.numer.terms)
    acc = {e: c for e, c in acc.items() if sum(e[nz:]) <= degree}
    for f, mult in sorted(fr.denom.items(), key=lambda kv: factor_sort_key(kv[0])):
        series = _factor_inverse_series(vt, f, mult, degree)
        acc = _series_mul(acc, series, nz, degree, escape=False)
    if fr.scale_den != 1:
        inv = Fraction(1, fr.scale_den)
        acc = {e: c * inv for e, c in acc.items()}
    pf = problem.prefactor_poly()
    if pf.terms != {vt.zero_exps(): 1}:
        acc = _series_mul(acc, pf.terms, nz, degree, escape=False)
    return acc


def _factor_inverse_series(vt, f, mult, degree):
    """1/factor^mult as truncated series terms; factors must be expandable."""
    tag = f[0]
    width = len(vt.names)
    if tag == "pm":
        raise EngineError("bare parameter monomial in an oracle denominator")
    if tag == "pd":
        raise EngineError("parameter difference is not series-expandable")
    if tag == "zm":
        e = [0] * width
        e[f[1]] = -mult
        return {tuple(e): 1}
    if tag == "pb":
        m = f[1]
        md = sum(m)
        out = {}
        r = 0
        while r * md <= degree:
            out[tuple(x * r for x in m)] = comb(r + mult - 1, mult - 1)
            r += 1
        return out
    # zb: require the dominant side monic so 1/(z_j - c z_i) expands
    _, i, mi, j, mj = f
    d = tuple(map(int.__sub__, mi, mj))
    if lex_positive(vt, d):
        # the i side carries the lex-bigger (hence smaller-magnitude)
        # monomial; the factor is -(z_j-side)(1 - ratio)
        big_var, big_m, small_var, small_m = j, mj, i, mi
        sign = (-1) ** mult
    elif any(d):
        big_var, big_m, small_var, small_m = i, mi, j, mj
        sign = 1
    else:
        raise OnTorusPoleError("on-torus factor in oracle denominator")
    if any(big_m):
        raise EngineError("oracle requires the dominant side to be monic")
    ratio_deg = sum(small_m)
    if ratio_deg == 0:
        raise EngineError("zero-degree expansion ratio")
    out = {}
    r = 0
    while r * ratio_deg <= degree:
        exps = [0] * width
        exps[small_var] += r
        exps[big_var] -= mult + r
        for p, x in enumerate(small_m):
            if x:
                exps[p] += r * x
        out[tuple(exps)] = sign * comb(r + mult - 1, mult - 1)
        r += 1
    return out


def _series_mul(a, b, nz, degree, free_down=0, escape=True):
    bpre = [(e2, c2, sum(e2[nz:])) for e2, c2 in b.items()]
    out = {}
    get = out.get
    for e1, c1 in a.items():
        p1 = sum(e1[nz:])
        for e2, c2, p2 in bpre:
            p = p1 + p2
            if p > degree:
                continue
            e = tuple(map(int.__add__, e1, e2))
            if escape and _prunable(e, nz, degree - p, free_down):
                continue
            s = get(e, 0) + c1 * c2
            if s:
                out[e] = s
            else:
                del out[e]
    return out


def inner_product_ct(problem, trunc):
    """Constant-term oracle: z-constant term of f times the weight, over k!.

    Every reported coefficient of total parameter degree <= D is exact.
    Prunes any intermediate term whose z-displacement can no longer be
    cancelled within the remaining degree budget (each unit of z-movement
    costs at least one unit of parameter degree in every factor).
    """
    degree = trunc.degree if isinstance(trunc, SeriesTruncation) else int(trunc)
    fr = problem.integrand
    vt = fr.vt
    nz = vt.nz
    # z-moving factors first so pruning bites before the geometric blowup;
    # free_down tracks how much mandatory z-drop is still to come
    factors = sorted(fr.denom.items(), key=lambda kv: factor_sort_key(kv[0]))
    caps = [mult if f[0] in ("zb", "zm") else 0 for f, mult in factors]
    free = sum(caps)
    acc = _series_mul(
        dict(fr.numer.terms), vandermonde_weight(vt).terms, nz, degree, free
    )
    for (f, mult), cap in zip(factors, caps):
        free -= cap
        series = _factor_inverse_series(vt, f, mult, degree)
        acc = _series_mul(acc, series, nz, degree, free)
    pf = problem.prefactor_poly()
    if pf.terms != {vt.zero_exps(): 1}:
        acc = _series_mul(acc, pf.terms, nz, degree, 0)
    norm = Fraction(1, fr.scale_den * factorial(nz))
    out = {}
    for e, c in acc.items():
        if any(e[:nz]):
            continue
        key = tuple(e[nz:])
        val = c * norm
        if val:
            out[key] = val
    for e, c in out.items():
        if isinstance(c, Fraction) and c.denominator == 1:
            out[e] = c.numerator
    return out


def series_agree(closed, oracle_map, degree):
    """Compare a ClosedFormSeries against an oracle dict; [] when equal."""
    want = closed.expand(degree)
    diffs = []
    keys = set(want) | set(oracle_map)
    for e in sorted(keys):
        if sum(e) > degree:
            continue
        a = want.get(e, 0)
        b = oracle_map.get(e, 0)
        if a != b:
            diffs.append((e, a, b))
    return diffs
