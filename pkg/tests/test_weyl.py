"""Residue engine vs constant-term oracle: examples first, then sweeps."""
from __future__ import annotations

import json
from fractions import Fraction
from functools import lru_cache

import pytest

import _refs
from cochar.algebra import (
    FactoredRational,
    LaurentPolynomial as LP,
    VarTable,
    make_param_binomial,
    make_zbinomial,
)
from cochar.weyl import (
    ClosedFormSeries,
    EngineError,
    InnerProductProblem,
    OnTorusPoleError,
    SeriesTruncation,
    inner_product_ct,
    inner_product_residue,
    normalize_torus,
    poles_inside,
    residue_at,
    series_agree,
    vandermonde_weight,
)


@lru_cache(maxsize=None)
def closed(k, n, m, mixed=False):
    return inner_product_residue(_refs.weyl_problem(k, n, m, mixed))


@lru_cache(maxsize=None)
def oracle(k, n, m, mixed, degree):
    return inner_product_ct(_refs.weyl_problem(k, n, m, mixed), degree)


def unit_exps(vt, name, e=1):
    out = [0] * len(vt.names)
    out[vt.index[name]] = e
    return tuple(out)


def stage_one(problem):
    """The working rational just before the first variable is eliminated:
    integrand times the Vandermonde weight over z_1...z_k."""
    fr = problem.integrand
    vt = fr.vt
    work = fr.mul_poly(vandermonde_weight(vt))
    denom = dict(work.denom)
    for i in range(vt.nz):
        denom[("zm", i)] = denom.get(("zm", i), 0) + 1
    work = FactoredRational(vt, work.numer, denom, work.scale_den)
    return normalize_torus(work.simplify(), 0)


class TestPolesInside:
    def test_pure_k3_first_variable(self):
        work = stage_one(_refs.weyl_problem(3, 1, 0))
        poles = poles_inside(work, "z1")
        t = unit_exps(work.vt, "t")
        assert poles[0][0] == "origin" and poles[0][1] >= 1
        shifts = {(p[2], p[1]) for p in poles if p[0] == "shift"}
        # z1 = t z2 and z1 = t z3, nothing else
        assert shifts == {(1, t), (2, t)}

    def test_multiplicity_aggregation(self):
        vt = VarTable.weyl(3, 1, 0)
        t = unit_exps(vt, "t")
        t2 = unit_exps(vt, "t", 2)
        denom = {}
        make_zbinomial(vt, 1, (0,) * 4, 2, t, denom)
        make_zbinomial(vt, 1, (0,) * 4, 2, t2, denom, mult=2)
        fr = FactoredRational(vt, LP.const(vt, 1), denom)
        poles = poles_inside(fr, "z2")
        assert [(p[0], p[1], p[2], p[3]) for p in poles] == [
            ("shift", t, 2, 1),
            ("shift", t2, 2, 2),
        ]

    def test_outside_pole_excluded(self):
        # 1/(z1 - t^-1 z2), normalized to units: 1/(t z1 - z2); the pole
        # z1 = t^-1 z2 sits outside the contour
        vt = VarTable.weyl(2, 1, 0)
        denom = {}
        make_zbinomial(vt, 0, unit_exps(vt, "t"), 1, (0,) * 3, denom)
        fr = FactoredRational(vt, LP.const(vt, 1), denom)
        assert poles_inside(fr, "z1") == []
        # seen from z2 the same factor is an inside pole z2 = t z1
        poles = poles_inside(fr, "z2")
        assert [(p[0], p[1], p[2], p[3]) for p in poles] == [
            ("shift", unit_exps(vt, "t"), 0, 1)
        ]

    def test_on_torus_pole_rejected(self):
        vt = VarTable.weyl(2, 1, 0)
        denom = {}
        make_zbinomial(vt, 0, (0,) * 3, 1, (0,) * 3, denom)
        fr = FactoredRational(vt, LP.const(vt, 1), denom)
        with pytest.raises(OnTorusPoleError):
            poles_inside(fr, "z1")


class TestResidueAt:
    def test_inverse_z(self):
        vt = VarTable.weyl(1, 1, 0)
        fr = FactoredRational(vt, LP.const(vt, 1), {("zm", 0): 1})
        (pole,) = poles_inside(fr, "z1")
        res = residue_at(fr, "z1", pole)
        assert res.equals(FactoredRational.from_poly(LP.const(vt, 1)))

    def test_simple_shift_pole(self):
        # 1/(z1 (z1 - t z2)) at z1 = t z2 gives 1/(t z2)
        vt = VarTable.weyl(2, 1, 0)
        denom = {("zm", 0): 1}
        make_zbinomial(vt, 0, (0,) * 3, 1, unit_exps(vt, "t"), denom)
        fr = FactoredRational(vt, LP.const(vt, 1), denom)
        poles = poles_inside(fr, "z1")
        shift = [p for p in poles if p[0] == "shift"]
        origin = [p for p in poles if p[0] == "origin"]
        assert len(shift) == 1 and len(origin) == 1
        res = residue_at(fr, "z1", shift[0])
        want = FactoredRational(
            vt, LP.const(vt, 1), {("pm", vt.index["t"]): 1, ("zm", 1): 1}
        )
        assert res.equals(want)
        # the origin residue cancels it: the function has no constant term
        assert res.add(residue_at(fr, "z1", origin[0])).is_zero()

    def test_double_pole_derivative(self):
        # z1/(z1 - t z2)^2 at z1 = t z2: d/dz1 of the numerator, so 1
        vt = VarTable.weyl(2, 1, 0)
        denom = {}
        make_zbinomial(vt, 0, (0,) * 3, 1, unit_exps(vt, "t"), denom, mult=2)
        fr = FactoredRational(vt, LP.var(vt, "z1"), denom)
        (pole,) = poles_inside(fr, "z1")
        assert pole[3] == 2
        res = residue_at(fr, "z1", pole)
        assert res.equals(FactoredRational.from_poly(LP.const(vt, 1)))


def cfs_one(pt):
    return ClosedFormSeries(pt, LP.const(pt, 1), {})


class TestInnerProductResidue:
    def test_constant_integrand(self):
        vt = VarTable.weyl(3, 0, 0)
        prob = InnerProductProblem(FactoredRational.from_poly(LP.const(vt, 1)))
        cf = inner_product_residue(prob)
        assert cf.equals(cfs_one(vt.params_only()))

    def test_adjoint_character(self):
        # sum over all i, j of z_i z_j^-1: one-dimensional invariant space
        cf = closed(3, 0, 0, mixed=True)
        assert cf.equals(cfs_one(cf.vt))

    def test_one_even_one_odd_closed_form(self):
        cf = closed(3, 1, 1)
        pt = VarTable.params(1, 1)
        t = LP.var(pt, "t")
        u = LP.var(pt, "u")
        one = LP.const(pt, 1)
        dpoly = (one - t) * (one - t * t) * (one - t ** 3)
        want = ClosedFormSeries(
            pt,
            dpoly + (t + u) * _refs.n_poly(pt),
            {(1, 0): 1, (2, 0): 1, (3, 0): 1},
        )
        assert cf.denom == want.denom
        assert cf.equals(want)

    def test_mixed_one_even_one_odd_closed_form(self):
        cf = closed(3, 1, 1, mixed=True)
        pt = VarTable.params(1, 1)
        t = LP.var(pt, "t")
        u = LP.var(pt, "u")
        one = LP.const(pt, 1)
        dpoly = (one - t) * (one - t) * (one - t * t)
        want = ClosedFormSeries(
            pt,
            dpoly + (t + u) * _refs.nbar_poly(pt),
            {(1, 0): 2, (2, 0): 1},
        )
        assert cf.denom == want.denom
        assert cf.equals(want)

    def test_order_independence(self):
        orders = [["z1", "z2", "z3"], ["z3", "z1", "z2"], ["z2", "z3", "z1"]]
        for mixed in (False, True):
            prob = _refs.weyl_problem(3, 1, 1, mixed)
            results = [inner_product_residue(prob, order=o) for o in orders]
            for other in results[1:]:
                assert other.denom == results[0].denom
                assert other.numer == results[0].numer

    def test_bad_order_rejected(self):
        prob = _refs.weyl_problem(2, 1, 0)
        with pytest.raises(ValueError):
            inner_product_residue(prob, order=["z1", "z1"])

    def test_on_torus_integrand_rejected(self):
        # order 3 so the Vandermonde numerator cannot cancel the factor away
        vt = VarTable.weyl(2, 1, 0)
        denom = {}
        make_zbinomial(vt, 0, (0,) * 3, 1, (0,) * 3, denom, mult=3)
        prob = InnerProductProblem(
            FactoredRational(vt, LP.const(vt, 1), denom)
        )
        with pytest.raises(OnTorusPoleError):
            inner_product_residue(prob)

    def test_dump_stages(self, tmp_path):
        inner_product_residue(_refs.weyl_problem(2, 1, 0), dump_dir=str(tmp_path))
        for stage in (1, 2):
            payload = json.loads((tmp_path / ("stage%d.json" % stage)).read_text())
            assert isinstance(payload, list) and payload

    def test_prefactor_must_be_torus_free(self):
        vt = VarTable.weyl(2, 1, 0)
        fr = FactoredRational.from_poly(LP.const(vt, 1))
        with pytest.raises(ValueError):
            InnerProductProblem(fr, [LP.var(vt, "z1")])


class TestInnerProductCT:
    def test_truncation_validation(self):
        with pytest.raises(ValueError):
            SeriesTruncation(-1)

    def test_constant_integrand(self):
        vt = VarTable.weyl(3, 0, 0)
        prob = InnerProductProblem(FactoredRational.from_poly(LP.const(vt, 1)))
        assert inner_product_ct(prob, SeriesTruncation(0)) == {(): 1}

    def test_partitions_into_parts_up_to_three(self):
        got = oracle(3, 1, 0, False, 6)
        assert [got.get((d,), 0) for d in range(7)] == [1, 1, 2, 3, 4, 5, 7]

    def test_pure_single_column_row(self):
        got = oracle(3, 0, 1, False, 9)
        assert [got.get((d,), 0) for d in range(10)] == _refs.PURE_COLUMNS

    def test_mixed_single_column_row(self):
        got = oracle(3, 0, 1, True, 9)
        assert [got.get((d,), 0) for d in range(10)] == _refs.MIXED_COLUMNS

    def test_rejects_parameter_difference_factor(self):
        vt = VarTable.weyl(1, 1, 1)
        denom = {}
        make_param_binomial(
            vt, unit_exps(vt, "t"), unit_exps(vt, "u"), denom
        )
        prob = InnerProductProblem(
            FactoredRational(vt, LP.const(vt, 1), denom)
        )
        with pytest.raises(EngineError):
            inner_product_ct(prob, 4)

    def test_rejects_bare_parameter_pole(self):
        vt = VarTable.weyl(1, 1, 0)
        fr = FactoredRational(
            vt, LP.const(vt, 1), {("pm", vt.index["t"]): 1}
        )
        with pytest.raises(EngineError):
            inner_product_ct(InnerProductProblem(fr), 4)


ENVELOPE = [
    (k, n, m, mixed)
    for k in (1, 2, 3)
    for n in range(4)
    for m in range(4 - n)
    if n + m
    for mixed in (False, True)
]


def sweep_degree(k, n, m):
    return 8 if k == 3 and n + m >= 3 else 10


@pytest.mark.parametrize("k,n,m,mixed", ENVELOPE)
def test_engine_equivalence(k, n, m, mixed):
    d = sweep_degree(k, n, m)
    assert series_agree(closed(k, n, m, mixed), oracle(k, n, m, mixed, d), d) == []


@pytest.mark.parametrize("n,m", [(1, 0), (0, 1), (1, 1), (2, 0)])
def test_coefficients_nonnegative_integers(n, m):
    for mixed in (False, True):
        for exps, c in closed(3, n, m, mixed).expand(10).items():
            assert isinstance(c, int) and c >= 0, (exps, c)


@pytest.mark.parametrize("k,n,m,mixed", [(3, 1, 2, False), (3, 2, 1, True)])
def test_symmetry_check(k, n, m, mixed):
    assert _refs.weyl_problem(k, n, m, mixed).check_symmetry(degree=2)


def test_parameter_permutation_symmetry():
    # two odd parameters: the truncated series is symmetric under u1 <-> u2
    got = oracle(3, 1, 2, False, 6)
    vt = VarTable.params(1, 2)
    a, b = vt.index["u1"] - vt.nz, vt.index["u2"] - vt.nz
    swapped = {}
    for e, c in got.items():
        ne = list(e)
        ne[a], ne[b] = ne[b], ne[a]
        swapped[tuple(ne)] = c
    assert swapped == got


def test_normalization_is_inverse_factorial():
    assert _refs.weyl_problem(3, 1, 0).normalization == Fraction(1, 6)
    assert _refs.weyl_problem(2, 1, 0).normalization == Fraction(1, 2)
