"""Partitions, Schur polynomials, and their two-alphabet extension.

Everything here is exact and symbolic: Schur and skew Schur polynomials
come from determinants of complete homogeneous polynomials, and the
two-alphabet (hook) variant is assembled from those. A Cauchy-style
product identity is provided as a self-check that ties the whole family
together degree by degree.
"""
from __future__ import annotations

from functools import lru_cache

from .algebra import LaurentPolynomial as LP, VarTable


class Partition:
    """Weakly decreasing positive parts; zero parts are stripped."""

    __slots__ = ("parts",)

    def __init__(self, parts=()):
        if isinstance(parts, Partition):
            parts = parts.parts
        cleaned = []
        for p in parts:
            q = int(p)
            if q < 0:
                raise ValueError("negative part")
            if cleaned and q > cleaned[-1]:
                raise ValueError("parts must be weakly decreasing")
            if q:
                cleaned.append(q)
        object.__setattr__(self, "parts", tuple(cleaned))

    def __setattr__(self, name, value):
        raise AttributeError("Partition is immutable")

    @property
    def size(self):
        return sum(self.parts)

    def __len__(self):
        return len(self.parts)

    def __getitem__(self, i):
        # reads off the i-th part, 0-indexed, with 0 past the end
        if i < 0:
            raise IndexError(i)
        return self.parts[i] if i < len(self.parts) else 0

    def __iter__(self):
        return iter(self.parts)

    def __eq__(self, other):
        if isinstance(other, Partition):
            return self.parts == other.parts
        if isinstance(other, tuple):
            return self.parts == other
        return NotImplemented

    def __hash__(self):
        return hash(self.parts)

    def __repr__(self):
        return "Partition(%r)" % (self.parts,)

    def conjugate(self):
        if not self.parts:
            return Partition()
        out = []
        for i in range(self.parts[0]):
            out.append(sum(1 for p in self.parts if p > i))
        return Partition(out)

    def contains(self, other):
        other = Partition(other)
        return all(self[i] >= other[i] for i in range(len(other)))

    def in_hook(self, n, m):
        """Whether the shape fits the (n, m) hook: part n+1 is at most m."""
        return self[n] <= m

    def run_notation(self):
        """Exponent-run rendering, e.g. (9,2^3,1^2)."""
        runs = []
        i = 0
        while i < len(self.parts):
            j = i
            while j < len(self.parts) and self.parts[j] == self.parts[i]:
                j += 1
            if j - i == 1:
                runs.append(str(self.parts[i]))
            else:
                runs.append("%d^%d" % (self.parts[i], j - i))
            i = j
        return "(" + ",".join(runs) + ")"


def partitions(n, max_part=None):
    """All partitions of n with parts bounded by max_part, as Partitions."""
    if max_part is None:
        max_part = n

    def gen(rem, bound):
        if rem == 0:
            yield ()
            return
        for first in range(min(rem, bound), 0, -1):
            for rest in gen(rem - first, first):
                yield (first,) + rest

    for parts in gen(n, max_part):
        yield Partition(parts)


# ---------------------------------------------------------------------------
# determinantal construction


@lru_cache(maxsize=None)
def _h_poly(vt, names, d):
    """Complete homogeneous polynomial of degree d in the named variables."""
    if d < 0:
        return LP.zero(vt)
    if d == 0:
        return LP.const(vt, 1)
    if not names:
        return LP.zero(vt)
    head, rest = names[0], names[1:]
    x = LP.var(vt, head)
    out = LP.zero(vt)
    power = LP.const(vt, 1)
    for e in range(d + 1):
        out = out + power * _h_poly(vt, rest, d - e)
        power = power * x
    return out


def _det(vt, rows):
    """Determinant by first-row expansion with memoized minors."""
    n = len(rows)
    if n == 0:
        return LP.const(vt, 1)
    memo = {}

    def minor(i, mask):
        if i == n:
            return LP.const(vt, 1)
        got = memo.get(mask)
        if got is not None:
            return got
        acc = LP.zero(vt)
        sign = 1
        for j in range(n):
            bit = 1 << j
            if not mask & bit:
                continue
            entry = rows[i][j]
            if not entry.is_zero():
                acc = acc + (entry * minor(i + 1, mask & ~bit)).scaled(sign)
            sign = -sign
        memo[mask] = acc
        return acc

    return minor(0, (1 << n) - 1)


@lru_cache(maxsize=None)
def _skew_schur_cached(vt, names, lam, mu):
    rows = []
    width = len(lam)
    for i in range(width):
        row = []
        for j in range(width):
            mu_j = mu[j] if j < len(mu) else 0
            row.append(_h_poly(vt, names, lam[i] - mu_j - i + j))
        rows.append(row)
    return _det(vt, rows)


def schur(lam, vt, names):
    """Schur polynomial of the shape in the named variables of vt."""
    lam = Partition(lam)
    names = tuple(names)
    if len(lam) > len(names):
        return LP.zero(vt)
    return _skew_schur_cached(vt, names, lam.parts, ())


def skew_schur(lam, mu, vt, names):
    """Skew Schur polynomial for mu inside lam."""
    lam = Partition(lam)
    mu = Partition(mu)
    if not lam.contains(mu):
        raise ValueError("inner shape does not fit: %r / %r" % (lam, mu))
    return _skew_schur_cached(vt, tuple(names), lam.parts, mu.parts)


def _subshapes(lam, max_rows):
    """Partitions contained in lam with at most max_rows parts."""
    bounds = lam.parts[:max_rows]

    def gen(i, prev):
        if i == len(bounds):
            yield ()
            return
        for v in range(min(prev, bounds[i]), -1, -1):
            for rest in gen(i + 1, v):
                yield (v,) + rest

    for parts in gen(0, lam[0] if lam.parts else 0):
        yield Partition(parts)


def hook_schur(lam, vt, tnames, unames):
    """Two-alphabet Schur polynomial: weak alphabet tnames, strict unames.

    Computed as the sum over inner shapes mu of S_mu(t) times the skew
    conjugate S_(lam'/mu')(u). Vanishes exactly when the shape does not
    fit the (len(tnames), len(unames)) hook.
    """
    lam = Partition(lam)
    tnames = tuple(tnames)
    unames = tuple(unames)
    lamc = lam.conjugate()
    out = LP.zero(vt)
    for mu in _subshapes(lam, len(tnames)):
        left = _skew_schur_cached(vt, tnames, mu.parts, ())
        if left.is_zero():
            continue
        right = _skew_schur_cached(vt, unames, lamc.parts, mu.conjugate().parts)
        if right.is_zero():
            continue
        out = out + left * right
    return out


# ---------------------------------------------------------------------------
# the hook correspondence for shapes with at most two columns past the first


def hook_correspondence(lam):
    """Map a shape with second part at most 2 and first part at least 2 to
    (n, (mu1, mu2)): n strips the first row down to 2, mu reads the first
    two column lengths less one."""
    lam = Partition(lam)
    if lam[0] < 2:
        raise ValueError("first part must be at least 2")
    if not lam.in_hook(1, 2):
        raise ValueError("second part exceeds 2")
    conj = lam.conjugate()
    return lam[0] - 2, (conj[0] - 1, conj[1] - 1)


def hook_correspondence_inverse(n, mu):
    """Rebuild the shape (n+2, 2^mu2, 1^(mu1-mu2))."""
    mu1, mu2 = mu
    if n < 0 or mu2 < 0 or mu1 < mu2:
        raise ValueError("need n >= 0 and mu1 >= mu2 >= 0")
    return Partition((n + 2,) + (2,) * mu2 + (1,) * (mu1 - mu2))


# ---------------------------------------------------------------------------
# product identity self-check


def _group(prefix, count):
    if count == 0:
        return ()
    return tuple("%s%d" % (prefix, i + 1) for i in range(count))


def cauchy_check(a, b, c, d, degree):
    """Compare the two-alphabet pairing sum against its product form.

    Left side: sum over shapes fitting both the (a, b) and (c, d) hooks,
    up to the truncation size, of HS(x;u) * HS(y;v). Right side: the
    product of (1 + x_i v_j)(1 + u_i y_j) over (1 - x_i y_j)(1 - u_i v_j),
    expanded to the same total degree. Returns the list of coefficient
    mismatches up to that degree; empty means the identity holds.
    """
    xs, us = _group("x", a), _group("u", b)
    ys, vs = _group("y", c), _group("v", d)
    pairs = [(nm, "t") for nm in xs] + [(nm, "u") for nm in us]
    pairs += [(nm, "t") for nm in ys] + [(nm, "u") for nm in vs]
    vt = VarTable.of(*pairs)
    width = len(vt.names)

    lhs = LP.const(vt, 1)
    for s in range(1, degree + 1):
        for lam in partitions(s):
            if lam.in_hook(a, b) and lam.in_hook(c, d):
                lhs = lhs + hook_schur(lam, vt, xs, us) * hook_schur(
                    lam, vt, ys, vs
                )

    numer = LP.const(vt, 1)
    denom = {}
    for g1, g2 in ((xs, vs), (us, ys)):
        for n1 in g1:
            for n2 in g2:
                e = [0] * width
                e[vt.index[n1]] = 1
                e[vt.index[n2]] = 1
                numer = numer * LP(vt, {vt.zero_exps(): 1, tuple(e): 1})
    for g1, g2 in ((xs, ys), (us, vs)):
        for n1 in g1:
            for n2 in g2:
                e = [0] * width
                e[vt.index[n1]] = 1
                e[vt.index[n2]] = 1
                denom[tuple(e)] = denom.get(tuple(e), 0) + 1

    from .weyl import ClosedFormSeries

    rhs = ClosedFormSeries(vt, numer, denom).expand(degree)
    got = {e: c for e, c in lhs.terms.items() if sum(e) <= degree}
    diffs = []
    for e in sorted(set(got) | set(rhs)):
        if got.get(e, 0) != rhs.get(e, 0):
            diffs.append((e, got.get(e, 0), rhs.get(e, 0)))
    return diffs
