"""End-to-end pipeline for trace-invariant multiplicity tables.

Stages: build the torus-average integrand for k generic matrices (with or
without the conjugation character), evaluate it in closed form, peel off
the single-column contributions, split what remains over two-row shapes
as g_mu(t) numerators, and read off per-shape multiplicities together
with their exact quadratic growth.
"""
from __future__ import annotations

import enum
import importlib.resources
import json
from dataclasses import dataclass
from fractions import Fraction
from math import lcm

from . import ENGINE_VERSION
from .algebra import (
    FactoredRational,
    LaurentPolynomial as LP,
    VarTable,
    format_rational,
    make_zbinomial,
)
from .symfunc import Partition, hook_correspondence, hook_schur
from .weyl import (
    ClosedFormSeries,
    EngineError,
    InnerProductProblem,
    inner_product_ct,
    inner_product_residue,
    series_agree,
)

MAX_K = 3
MAX_WEIGHT = 3  # closed-form envelope: n + m at most this


class TraceKind(enum.Enum):
    PURE = "pure"
    MIXED = "mixed"


def _param_positions(vt, kind_letter):
    return [i for i, kd in enumerate(vt.kinds) if kd == kind_letter]


def build_integrand(k, n, m, kind=TraceKind.PURE):
    """Torus-average problem for word traces in n generic and m generic
    skew-weighted matrices of size k.

    Off-diagonal (i != j) factors are cleared of z-inverses: every
    1/(1 - z_i z_j^-1 t_a) becomes a (z_j - t_a z_i) denominator binomial
    and every (1 + z_i z_j^-1 u_b) a (z_j + u_b z_i) numerator binomial,
    with one net z_j^(n-m) compensation per ordered pair. Diagonal factors
    carry no torus content: (1 - t_a)^-k stays in the denominator and
    (1 + u_b)^k is kept aside as a prefactor so it never inflates the
    residue arithmetic. MIXED multiplies in the full conjugation
    character sum over i, j of z_i z_j^-1.
    """
    if k < 1:
        raise ValueError("need at least one torus variable")
    if n < 0 or m < 0 or n + m < 1:
        raise ValueError("need at least one parameter")
    kind = TraceKind(kind)
    vt = VarTable.weyl(k, n, m)
    width = len(vt.names)
    numer = LP.const(vt, 1)
    denom = {}
    sign = 1
    tpos = _param_positions(vt, "t")
    upos = _param_positions(vt, "u")
    for i in range(k):
        for j in range(k):
            if i == j:
                continue
            for tp in tpos:
                te = [0] * width
                te[tp] = 1
                sign *= make_zbinomial(vt, j, (0,) * width, i, tuple(te), denom)
            for up in upos:
                e1 = [0] * width
                e1[j] = 1
                e2 = [0] * width
                e2[i] = 1
                e2[up] = 1
                numer = numer * LP(vt, {tuple(e1): 1, tuple(e2): 1}, validate=False)
            if n != m:
                shift = [0] * width
                shift[j] = n - m
                numer = numer.mul_monomial(tuple(shift))
    if sign < 0:
        numer = -numer
    prefactor = []
    for tp in tpos:
        te = [0] * width
        te[tp] = 1
        denom[("pb", tuple(te))] = denom.get(("pb", tuple(te)), 0) + k
    for up in upos:
        ue = [0] * width
        ue[up] = 1
        prefactor.append(LP(vt, {(0,) * width: 1, tuple(ue): 1}, validate=False) ** k)
    if kind is TraceKind.MIXED:
        terms = {}
        for i in range(k):
            for j in range(k):
                e = [0] * width
                e[i] += 1
                e[j] -= 1
                e = tuple(e)
                terms[e] = terms.get(e, 0) + 1
        numer = numer * LP(vt, terms, validate=False)
    return InnerProductProblem(FactoredRational(vt, numer, denom), prefactor)


@dataclass
class PoincareResult:
    k: int
    n: int
    m: int
    kind: TraceKind
    series: ClosedFormSeries
    order: tuple
    engine_version: str
    verified_degree: int

    def to_obj(self):
        return {
            "k": self.k,
            "n": self.n,
            "m": self.m,
            "kind": self.kind.value,
            "series": self.series.to_obj(),
            "order": list(self.order),
            "engine_version": self.engine_version,
            "verified_degree": self.verified_degree,
        }

    @classmethod
    def from_obj(cls, obj):
        return cls(
            k=obj["k"],
            n=obj["n"],
            m=obj["m"],
            kind=TraceKind(obj["kind"]),
            series=ClosedFormSeries.from_obj(obj["series"]),
            order=tuple(obj["order"]),
            engine_version=obj["engine_version"],
            verified_degree=obj["verified_degree"],
        )


def poincare(k, n, m, kind=TraceKind.PURE, order=None, oracle_degree=12,
             dump_dir=None):
    """Closed-form multiplicity series, cross-checked against the
    truncated constant-term series to oracle_degree before returning."""
    kind = TraceKind(kind)
    if k > MAX_K or n + m > MAX_WEIGHT:
        raise EngineError(
            "outside the closed-form envelope (k <= %d, n + m <= %d); "
            "use the truncated series instead" % (MAX_K, MAX_WEIGHT)
        )
    problem = build_integrand(k, n, m, kind)
    series = inner_product_residue(problem, order=order, dump_dir=dump_dir)
    if oracle_degree:
        got = inner_product_ct(problem, oracle_degree)
        diffs = series_agree(series, got, oracle_degree)
        if diffs:
            raise EngineError(
                "closed form disagrees with the constant-term series: %r"
                % (diffs[:3],)
            )
    used = tuple(order) if order else tuple(problem.integrand.vt.names[:k])
    return PoincareResult(
        k=k,
        n=n,
        m=m,
        kind=kind,
        series=series,
        order=used,
        engine_version=ENGINE_VERSION,
        verified_degree=oracle_degree or 0,
    )


def column_multiplicities(kind=TraceKind.PURE, count=10, oracle_degree=12,
                          fetch=None):
    """Multiplicities of the single-column shapes, read off the one-odd-
    variable series; exactly zero from index 10 on for 3x3 matrices."""
    kind = TraceKind(kind)
    if fetch is None:
        res = poincare(3, 0, 1, kind, oracle_degree=oracle_degree)
    else:
        res = fetch(3, 0, 1, kind)
    return [res.series.coefficient((a,)) for a in range(count)]


def strip_columns(p, column_multiplicities):
    """Remove the single-column layer: P minus sum of m_(1^a) HS_(1^a)."""
    series = p.series if isinstance(p, PoincareResult) else p
    vt = series.vt
    tnames = tuple(nm for nm, kd in zip(vt.names, vt.kinds) if kd == "t")
    unames = tuple(nm for nm, kd in zip(vt.names, vt.kinds) if kd == "u")
    total = LP.zero(vt)
    for a, mult in enumerate(column_multiplicities):
        if mult:
            total = total + hook_schur((1,) * a, vt, tnames, unames).scaled(mult)
    numer = series.numer - total * series.denominator_poly()
    return ClosedFormSeries(vt, numer, dict(series.denom))


class GPolynomialTable:
    """Numerators g_mu(t) of the two-row generating functions, plus the
    shared denominator and the single-column values, per trace kind."""

    def __init__(self, kind, g, denom, columns):
        self.kind = TraceKind(kind)
        self.tvt = VarTable.params(1, 0)
        self._g = dict(g)
        self.denom = dict(denom)
        self.columns = tuple(columns)
        self._expansions = {}

    def mus(self):
        return sorted(self._g, key=lambda mu: (-mu[0], -mu[1]))

    def g(self, mu):
        mu = tuple(mu)
        got = self._g.get(mu)
        return got if got is not None else LP.zero(self.tvt)

    def series(self, mu):
        return ClosedFormSeries(self.tvt, self.g(mu), self.denom)

    def m_values(self, mu, upto):
        """Coefficients of g_mu over the denominator for n = 0..upto."""
        mu = tuple(mu)
        cached = self._expansions.get(mu)
        if cached is None or len(cached) <= upto:
            exp = self.series(mu).expand(upto)
            cached = [exp.get((i,), 0) for i in range(upto + 1)]
            self._expansions[mu] = cached
        return cached[: upto + 1]


def extract_g(pstar, kind, columns=()):
    """Split a column-stripped series over two-row shapes.

    The numerator must be exactly divisible by (t+u1)(t+u2); after
    multiplying the quotient by (u1-u2), the coefficient of
    u1^(mu1+1) u2^mu2 is g_mu(t).
    """
    vt = pstar.vt
    ti, u1i, u2i = vt.index["t"], vt.index["u1"], vt.index["u2"]
    t, u1, u2 = LP.var(vt, "t"), LP.var(vt, "u1"), LP.var(vt, "u2")
    quotient = pstar.numer.divided_by((t + u1) * (t + u2))
    alternant = quotient * (u1 - u2)
    swap = list(range(len(vt.names)))
    swap[u1i], swap[u2i] = u2i, u1i
    if not (alternant + alternant.permuted(swap)).is_zero():
        raise EngineError("two-row splitting is not antisymmetric")
    tvt = VarTable.params(1, 0)
    g = {}
    for e, c in alternant.terms.items():
        p, q = e[u1i], e[u2i]
        if p <= q:
            continue
        mu = (p - 1, q)
        g.setdefault(mu, {})[(e[ti],)] = c
    table = {}
    for mu, terms in g.items():
        poly = LP(tvt, terms)
        if poly.is_zero():
            continue
        if mu[0] >= 9:
            raise EngineError(
                "nonzero weight on a shape with more than 9 rows: %r" % (mu,)
            )
        table[mu] = poly
    denom = {}
    for mono, e in pstar.denom.items():
        if any(mono[i] for i in range(len(mono)) if i != ti):
            raise EngineError("denominator is not a function of t alone")
        denom[(mono[ti],)] = e
    return GPolynomialTable(kind, table, denom, columns)


def multiplicity(lam, table):
    """Exact multiplicity of one shape, for shapes with second part <= 2."""
    lam = Partition(lam)
    if not lam.in_hook(1, 2):
        raise ValueError(
            "shape %s outside the covered hooks" % lam.run_notation()
        )
    if lam[0] <= 1:
        a = len(lam)
        return table.columns[a] if a < len(table.columns) else 0
    n, mu = hook_correspondence(lam)
    return table.m_values(mu, n)[n]


@dataclass(frozen=True)
class AsymptoticPair:
    alpha: Fraction
    beta: Fraction
    n0: int
    period: int
    exact: bool  # no bounded-periodic remainder on the fitted window

    def describe(self):
        out = _quadratic_str(self.alpha, self.beta)
        if not self.exact:
            out += " + O(1)"
        return out


def _frac_term(c, sym):
    c = Fraction(c)
    num, den = abs(c.numerator), c.denominator
    body = sym if num == 1 else "%d%s" % (num, sym)
    if den != 1:
        body += "/%d" % den
    return body


def _quadratic_str(alpha, beta):
    pieces = []
    if alpha:
        pieces.append(("-" if alpha < 0 else "", _frac_term(alpha, "n^2")))
    if beta:
        pieces.append(("-" if beta < 0 else "", _frac_term(beta, "n")))
    if not pieces:
        return "0"
    out = ("-" if pieces[0][0] else "") + pieces[0][1]
    for sgn, body in pieces[1:]:
        out += (" - " if sgn else " + ") + body
    return out


def _eval_one(poly):
    return sum(poly.terms.values())


def asymptotics(g, denom, n0=10):
    """Quadratic growth of the coefficients of g over prod (1-t^j).

    alpha and beta come from the order-3 and order-2 partial fractions at
    t = 1; an exact finite-difference fit over a window past n0 confirms
    them and reports whether the bounded remainder is identically zero
    there. The two derivations disagreeing is an error.
    """
    tvt = g.vt
    (tname,) = tvt.names
    dpoly = LP.const(tvt, 1)
    one_minus_t = LP(tvt, {(0,): 1, (1,): -1})
    for mono, e in sorted(denom.items()):
        dpoly = dpoly * LP(tvt, {(0,): 1, mono: -1}) ** e
    epoly = dpoly.divided_by(one_minus_t ** 3)
    e1 = _eval_one(epoly)
    g1 = _eval_one(g)
    ep1 = _eval_one(epoly.derivative(tname))
    gp1 = _eval_one(g.derivative(tname))
    a2 = Fraction(g1, e1)
    b2 = Fraction(g1 * ep1 - gp1 * e1, e1 * e1)
    alpha = a2 / 2
    beta = 3 * a2 / 2 + b2

    period = lcm(*[sum(mono) for mono in denom]) if denom else 1
    fit_len = max(period, 3)
    top = n0 + 2 * period + fit_len - 1
    coeffs = ClosedFormSeries(tvt, g, denom).expand(top)
    c = [coeffs.get((i,), 0) for i in range(top + 1)]
    exact = True
    for n in range(n0, top - 2 * period + 1):
        c0, c1, c2 = c[n], c[n + period], c[n + 2 * period]
        fit_alpha = Fraction(c2 - 2 * c1 + c0, 2 * period * period)
        fit_beta = (
            Fraction(c1 - c0, period) - fit_alpha * (2 * n + period)
        )
        if fit_alpha != alpha or fit_beta != beta:
            raise EngineError(
                "window fit disagrees with the partial fractions at n=%d" % n
            )
        if c0 != alpha * n * n + beta * n:
            exact = False
    return AsymptoticPair(alpha, beta, n0, period, exact)


def formanek_check(a, table, degree=15):
    """Row-strip identity: the shape (n+2, 2^a, 1^(8-a)) must carry the
    same multiplicity as (n+1, 1^a), for every n. Compares the two
    generating sequences up to the given degree; returns mismatches."""
    if not 0 <= a <= 8:
        raise ValueError("a must be within 0..8")
    lhs = table.m_values((8, a), degree)
    rhs_tail = table.m_values((a, 0), degree)
    diffs = []
    for n in range(degree + 1):
        if n == 0:
            want = table.columns[a + 1] if a + 1 < len(table.columns) else 0
        else:
            want = rhs_tail[n - 1]
        if lhs[n] != want:
            diffs.append((n, lhs[n], want))
    return diffs


def single_hook_rows(kind=TraceKind.PURE, oracle_degree=12, count=9):
    """Growth of the hook-shape multiplicities, one row per leg length.

    The weight-(1,1) series splits as 1 + (t + u) N / denominator with a
    denominator free of u, and the hook with arm a and leg b (first row
    a + 1, then b single-box rows) carries multiplicity [t^a u^b] of
    N / denominator. Returns, for b = 0..count-1, dicts with the leg
    length, the numerator slice in t, and its quadratic growth in a.
    """
    kind = TraceKind(kind)
    p = poincare(3, 1, 1, kind, oracle_degree=oracle_degree)
    s = p.series
    vt = s.vt
    ti = vt.kinds.index("t")
    ui = vt.kinds.index("u")
    if any(mono[ui] for mono in s.denom):
        raise EngineError("weight-(1,1) denominator is not free of u")
    dp = s.denominator_poly()
    tpu = LP(vt, {_unit(vt, ti): 1, _unit(vt, ui): 1})
    numer = (s.numer - dp).divided_by(tpu)
    tvt = VarTable.params(1, 0)
    denom1 = {(mono[ti],): e for mono, e in s.denom.items()}
    rows = []
    for b in range(count):
        slice_b = numer.coefficient_of({vt.names[ui]: b})
        gb = slice_b.map_to(tvt, rename={vt.names[ti]: tvt.names[0]})
        rows.append(
            {
                "b": b,
                "g": gb,
                "asym": asymptotics(gb, denom1),
                "series": ClosedFormSeries(tvt, gb, denom1),
            }
        )
    return rows


def _unit(vt, i):
    e = [0] * len(vt.names)
    e[i] = 1
    return tuple(e)


def _exponent_flip(poly):
    vt = poly.vt
    return LP(
        vt,
        {tuple(-x for x in e): c for e, c in poly.terms.items()},
        validate=False,
    )


def functional_equation_check(result):
    """Look for P(1/t_1..1/t_n) = s * (t_1...t_n)^e * P(t_1..t_n).

    Reports the (s, e) found, if any, and whether the reference form
    s = (-n)^k, e = k^2 holds verbatim.
    """
    series = result.series
    if any(kd != "t" for kd in series.vt.kinds):
        raise ValueError("functional equation applies to the m=0 series")
    q = series.numer
    r = series.denominator_poly()
    lhs = _exponent_flip(q) * r
    rhs = q * _exponent_flip(r)
    lt = lhs.sorted_terms()
    rt = rhs.sorted_terms()
    report = {
        "holds": False,
        "sign": None,
        "exponent": None,
        "reference_holds": False,
    }
    if len(lt) != len(rt):
        return report
    (e0, c0), (f0, d0) = lt[0], rt[0]
    delta = tuple(x - y for x, y in zip(e0, f0))
    scale = Fraction(c0, d0)
    for (ea, ca), (eb, cb) in zip(lt, rt):
        if tuple(x - y for x, y in zip(ea, eb)) != delta:
            return report
        if Fraction(ca, cb) != scale:
            return report
    if len(set(delta)) != 1:
        return report
    if scale.denominator != 1:
        return report
    sign = int(scale)
    report.update(holds=True, sign=sign, exponent=delta[0])
    ref_sign = (-result.n) ** result.k
    report["reference_holds"] = sign == ref_sign and delta[0] == result.k ** 2
    return report


# ---------------------------------------------------------------------------
# assembled tables


class MultiplicityTable:
    """All two-row rows for one trace kind, with growth data and the
    explicit multiplicities for the first few first-row lengths."""

    M_UPTO = 12

    def __init__(self, kind, gtable, rows, verified_degree):
        self.kind = TraceKind(kind)
        self.gtable = gtable
        self.rows = rows
        self.verified_degree = verified_degree

    @property
    def columns(self):
        return self.gtable.columns

    def row(self, mu):
        mu = tuple(mu)
        for r in self.rows:
            if r["mu"] == mu:
                return r
        raise KeyError(mu)

    def to_json_obj(self):
        return {
            "kind": self.kind.value,
            "engine_version": ENGINE_VERSION,
            "verified_degree": self.verified_degree,
            "denominator": [
                {"degree": mono[0], "mult": e}
                for mono, e in sorted(self.gtable.denom.items())
            ],
            "column_multiplicities": list(self.columns),
            "rows": [
                {
                    "mu": list(r["mu"]),
                    "g_coeffs_ascending": _coeff_list(r["g"]),
                    "alpha": format_rational(r["asym"].alpha),
                    "beta": format_rational(r["asym"].beta),
                    "asymptotic": r["asym"].describe(),
                    "m_values": r["m_values"],
                }
                for r in self.rows
            ],
        }

    def to_csv(self):
        lines = ["mu1,mu2,g_coeffs_ascending,alpha,beta"]
        for r in self.rows:
            lines.append(
                "%d,%d,%s,%s,%s"
                % (
                    r["mu"][0],
                    r["mu"][1],
                    " ".join(str(c) for c in _coeff_list(r["g"])),
                    format_rational(r["asym"].alpha),
                    format_rational(r["asym"].beta),
                )
            )
        return "\n".join(lines) + "\n"

    def to_markdown(self):
        head = "| mu | g_mu(t) | growth | m(n=0..%d) |" % self.M_UPTO
        sep = "|---|---|---|---|"
        lines = [head, sep]
        for r in self.rows:
            lines.append(
                "| (%d,%d) | %s | %s | %s |"
                % (
                    r["mu"][0],
                    r["mu"][1],
                    _poly_str_desc(r["g"]),
                    r["asym"].describe(),
                    " ".join(str(v) for v in r["m_values"]),
                )
            )
        return "\n".join(lines) + "\n"

    def to_latex(self):
        lines = [
            r"\begin{tabular}{llll}",
            r"$\mu$ & $g_\mu(t)$ & growth & $m$ ($n=0..%d$) \\" % self.M_UPTO,
            r"\hline",
        ]
        for r in self.rows:
            lines.append(
                r"$(%d,%d)$ & $%s$ & $%s$ & %s \\"
                % (
                    r["mu"][0],
                    r["mu"][1],
                    _poly_str_desc(r["g"]),
                    r["asym"].describe().replace("n^2", "n^{2}"),
                    " ".join(str(v) for v in r["m_values"]),
                )
            )
        lines.append(r"\end{tabular}")
        return "\n".join(lines) + "\n"

    def compare_reference(self, ref):
        """Diff computed rows against bundled reference values.

        ref holds the per-kind reference dict (mu_rows keyed "m1,m2" with
        g coefficient lists and alpha/beta strings). Returns a list of
        {key, computed, reference} entries; empty means full agreement.
        """
        diffs = []
        rows = {tuple(r["mu"]): r for r in self.rows}
        prefix = self.kind.value
        for key in sorted(ref.get("mu_rows", {})):
            want = ref["mu_rows"][key]
            mu = tuple(int(x) for x in key.split(","))
            got = rows.get(mu)
            g_got = _coeff_list(got["g"]) if got else []
            if g_got != list(want["g"]):
                diffs.append(
                    {
                        "key": "%s.mu_rows.%s.g" % (prefix, key),
                        "computed": g_got,
                        "reference": list(want["g"]),
                    }
                )
            if got is None:
                continue
            for field in ("alpha", "beta"):
                comp = format_rational(getattr(got["asym"], field))
                if comp != want[field]:
                    diffs.append(
                        {
                            "key": "%s.mu_rows.%s.%s" % (prefix, key, field),
                            "computed": comp,
                            "reference": want[field],
                        }
                    )
            if "exact" in want:
                comp_exact = got["asym"].exact
                if comp_exact != want["exact"]:
                    diffs.append(
                        {
                            "key": "%s.mu_rows.%s.exact" % (prefix, key),
                            "computed": comp_exact,
                            "reference": want["exact"],
                        }
                    )
        cols = ref.get("column_multiplicities")
        if cols is not None and list(self.columns) != list(cols):
            diffs.append(
                {
                    "key": "%s.column_multiplicities" % prefix,
                    "computed": list(self.columns),
                    "reference": list(cols),
                }
            )
        return diffs


def _coeff_list(g):
    deg = g.degree()
    if deg is None:
        return []
    out = [0] * (deg + 1)
    for e, c in g.terms.items():
        out[e[0]] = c
    return out


def _poly_str_desc(g):
    coeffs = _coeff_list(g)
    if not coeffs:
        return "0"
    bits = []
    for d in range(len(coeffs) - 1, -1, -1):
        c = coeffs[d]
        if not c:
            continue
        mag = abs(c)
        if d == 0:
            body = str(mag)
        elif d == 1:
            body = "t" if mag == 1 else "%dt" % mag
        else:
            body = "t^%d" % d if mag == 1 else "%dt^%d" % (mag, d)
        if not bits:
            bits.append(("-" if c < 0 else "") + body)
        else:
            bits.append((" - " if c < 0 else " + ") + body)
    return "".join(bits)


def multiplicity_table(kind=TraceKind.PURE, oracle_degree=12, order=None,
                       dump_dir=None, fetch=None):
    """Full pipeline for one trace kind; deterministic for fixed inputs.

    fetch, when given, replaces the closed-form evaluator; it takes
    (k, n, m, kind) and returns a PoincareResult (used for caching).
    """
    kind = TraceKind(kind)
    if fetch is None:
        p12 = poincare(3, 1, 2, kind, order=order,
                       oracle_degree=oracle_degree, dump_dir=dump_dir)
    else:
        p12 = fetch(3, 1, 2, kind)
    cols = column_multiplicities(kind, oracle_degree=oracle_degree,
                                 fetch=fetch)
    pstar = strip_columns(p12, cols)
    gtable = extract_g(pstar, kind, cols)
    rows = []
    for mu in gtable.mus():
        g = gtable.g(mu)
        rows.append(
            {
                "mu": mu,
                "g": g,
                "asym": asymptotics(g, gtable.denom),
                "m_values": gtable.m_values(mu, MultiplicityTable.M_UPTO),
            }
        )
    return MultiplicityTable(kind, gtable, rows, p12.verified_degree)


def load_reference(path=None):
    """Published 3x3 values bundled with the package (or from a file).

    Keys per trace kind: the weight-(1,1) numerator rows and denominator,
    column multiplicities, per-leg hook growth constants, and the two-row
    g/alpha/beta rows the computed tables are compared against.
    """
    if path is not None:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    ref = importlib.resources.files("cochar").joinpath(
        "data/reference_tables.json"
    )
    with ref.open("r", encoding="utf-8") as fh:
        return json.load(fh)


def reference_series(ref_kind, vt=None):
    """Closed form of the weight-(1,1) series from reference data.

    ref_kind is one per-kind subdict of load_reference(). The series is
    reassembled as 1 + (t + u) N / prod (1 - t^d)^mult.
    """
    if vt is None:
        vt = VarTable.params(1, 1)
    ti = vt.kinds.index("t")
    ui = vt.kinds.index("u")

    def mono(te, ue):
        e = [0] * len(vt.names)
        e[ti], e[ui] = te, ue
        return tuple(e)

    terms = {}
    for b, row in enumerate(ref_kind["series_numerator_rows"]):
        for a, c in enumerate(row):
            if c:
                terms[mono(a, b)] = c
    n_poly = LP(vt, terms)
    denom = {mono(d, 0): mult for d, mult in ref_kind["series_denominator"]}
    dp = LP(vt, {(0,) * len(vt.names): 1})
    for m, e in denom.items():
        factor = LP(vt, {(0,) * len(vt.names): 1, m: -1})
        for _ in range(e):
            dp = dp * factor
    tpu = LP(vt, {mono(1, 0): 1, mono(0, 1): 1})
    return ClosedFormSeries(vt, dp + tpu * n_poly, denom)
