import cmath
import math
from dataclasses import replace

import numpy as np
import pytest

from mdclab import qprop1d as qp
from mdclab.errors import CausticError, DegenerateCoeffs, OutOfRegime
from mdclab.oscgauss import compare, glue
from mdclab.params import LatticeParams, derive
from mdclab.reduction import closure_coeffs

from conftest import sample_triples


def test_one_step_kernel_exact_values(d321):
    k = qp.one_step_kernel("hat", d321)
    assert k.coeff("xa", "xb") == pytest.approx(12.5, abs=1e-12)
    assert k.coeff("xa", "xa") == pytest.approx(4.25, abs=1e-13)
    assert k.coeff("xb", "xb") == pytest.approx(4.25, abs=1e-13)
    # amplitude modulus sqrt((P+Q)/(2 pi hbar q)) = sqrt(25 / 4 pi)
    modulus = abs(k.amp) * (2 * math.pi) ** float(k.pihbar_pow)
    assert modulus == pytest.approx(math.sqrt(25.0 / (4.0 * math.pi)), abs=1e-12)
    assert cmath.phase(k.amp) == pytest.approx(math.pi / 4, abs=1e-15)


def test_one_step_kernel_is_symmetric(d321):
    k = qp.one_step_kernel("hat", d321)
    assert k.A[0, 0] == k.A[1, 1]
    assert k.A[0, 1] == k.A[1, 0]


def test_one_step_kernel_requires_elliptic_regime():
    d = derive(LatticeParams(1.0, -0.6, 0.3))
    with pytest.raises(OutOfRegime):
        qp.one_step_kernel("hat", d)


def test_factorized_step_reproduces_one_step(d321):
    for direction in ("hat", "bar"):
        diff = compare(
            qp.momentum_factorized_kernel(d321, direction),
            qp.one_step_kernel(direction, d321),
        )
        assert diff.exponent_diff <= 1e-12
        assert diff.amp_ratio_error <= 1e-12
        assert diff.pihbar_diff == 0


def test_factorized_step_zero_potential_is_a_fourier_pair(d321):
    k = qp.momentum_factorized_kernel(d321, zero_potential=True)
    plus = d321.P + d321.Q
    assert k.coeff("xa", "xa") == pytest.approx(-plus / (2 * d321.q), abs=1e-12)
    assert k.coeff("xb", "xb") == pytest.approx(-plus / (2 * d321.q), abs=1e-12)
    assert k.coeff("xa", "xb") == pytest.approx(plus / d321.q, abs=1e-12)


def test_factorized_step_parameter_sweep(rng):
    worst = 0.0
    for p, q, r in sample_triples(rng, 100):
        d = derive(LatticeParams(p, q, r))
        if d.hyperbolic:
            continue
        diff = compare(qp.momentum_factorized_kernel(d), qp.one_step_kernel("hat", d))
        worst = max(worst, diff.exponent_diff)
    assert worst <= 1e-11


def test_closed_form_reduces_to_one_step_at_n1(d321):
    diff = compare(qp.n_step_closed_form(1, d321), qp.one_step_kernel("hat", d321))
    assert diff.exponent_diff <= 1e-12
    assert diff.amp_ratio_error <= 1e-12


def test_iterated_kernel_matches_closed_form(d321):
    for n in range(1, 21):
        diff = compare(qp.n_step_kernel(n, d321), qp.n_step_closed_form(n, d321))
        assert diff.exponent_diff <= 1e-9
        assert diff.amp_ratio_error <= 1e-10
        assert diff.pihbar_diff == 0 and diff.vol_diff == 0


def test_tridiagonal_determinant_n2_value(d321):
    assert qp.tridiagonal_det(2, d321) == pytest.approx(-8.5j, abs=1e-12)


def test_tridiagonal_recursion_matches_closed_form(d321):
    for n in range(1, 21):
        rec = qp.tridiagonal_det(n, d321)
        closed = qp.tridiagonal_det_closed_form(n, d321)
        assert abs(rec - closed) <= 1e-12 * abs(closed)


def test_tridiagonal_parity_pattern(d321):
    # the base is purely imaginary, so the determinant alternates between
    # real and imaginary with the matrix size
    for n in range(2, 12):
        val = qp.tridiagonal_det(n, d321)
        if (n - 1) % 2 == 0:
            assert abs(val.imag) <= 1e-12 * abs(val)
        else:
            assert abs(val.real) <= 1e-12 * abs(val)


def test_corner_swap(d321):
    k_lr = qp.path_kernel(qp.TimePath(("+hat", "+bar")), d321)
    k_ul = qp.path_kernel(qp.TimePath(("+bar", "+hat")), d321)
    diff = compare(k_lr, k_ul)
    assert diff.exponent_diff <= 1e-10
    assert diff.amp_ratio_error <= 1e-10


def test_three_sides_of_a_square_regain_the_single_step(d321):
    k_sq = qp.path_kernel(qp.TimePath(("+bar", "+hat", "-bar")), d321)
    diff = compare(k_sq, qp.one_step_kernel("hat", d321))
    assert diff.exponent_diff <= 1e-10
    assert diff.amp_ratio_error <= 1e-10
    assert diff.pihbar_diff == 0 and diff.vol_diff == 0


def test_loop_insertion_leaves_the_kernel_unchanged(d321):
    base = qp.TimePath(("+hat", "+hat"))
    looped = base.with_loop(1)
    assert looped.displacement() == base.displacement()
    diff = compare(qp.path_kernel(looped, d321), qp.path_kernel(base, d321))
    assert diff.exponent_diff <= 1e-10
    assert diff.amp_ratio_error <= 1e-10


def test_forward_backward_pair_is_a_delta(d321):
    k = qp.path_kernel(qp.TimePath(("+hat", "-hat")), d321)
    assert len(k.constraints) == 1
    con = k.constraints[0].normalized()
    assert dict(con.coeffs) == pytest.approx({"xa": 1.0, "xb": -1.0})
    # net weight is exactly delta(xa - xb): amp carries the delta scaling
    assert k.pihbar_pow == 0
    assert k.amp == pytest.approx((d321.P + d321.Q) / d321.q, abs=1e-10)
    assert k.exponent({"xa": 0.37, "xb": 0.37}) == pytest.approx(0.0, abs=1e-12)


def test_multi_time_closed_form_reduces_at_m0(d321):
    diff = compare(qp.multi_time_closed_form(4, 0, d321), qp.n_step_closed_form(4, d321))
    assert diff.exponent_diff == 0.0
    assert diff.amp_ratio == 1.0


def test_monotone_and_backtracking_paths_match_multi_time(d321, rng):
    target = qp.multi_time_closed_form(3, 2, d321)
    for hat_first in (True, False):
        diff = compare(qp.path_kernel(qp.TimePath.monotone(3, 2, hat_first), d321), target)
        assert diff.exponent_diff <= 1e-9
    two_back = qp.TimePath(("+hat", "-hat", "+hat", "+bar", "-bar", "+hat", "+bar", "+hat", "+bar"))
    assert two_back.displacement() == (3, 2)
    diff = compare(qp.path_kernel(two_back, d321), target)
    assert diff.exponent_diff <= 1e-9
    assert diff.amp_ratio_error <= 1e-10


def test_random_paths_are_path_independent(d321, rng):
    target = qp.multi_time_closed_form(2, 2, d321)
    for _ in range(25):
        path = qp.random_path(rng, 2, 2)
        assert path.displacement() == (2, 2)
        diff = compare(qp.path_kernel(path, d321), target)
        assert diff.exponent_diff <= 1e-9
        assert diff.amp_ratio_error <= 1e-10


def test_group_property(d321):
    k_hat = qp.n_step_closed_form(3, d321, "hat", ("xa", "xm"))
    k_bar = qp.n_step_closed_form(2, d321, "bar", ("xm", "xb"))
    diff = compare(glue(k_hat, k_bar, ("xm",)), qp.multi_time_closed_form(3, 2, d321))
    assert diff.exponent_diff <= 1e-12
    assert diff.amp_ratio_error <= 1e-12


def test_caustics_raise_consistently_and_pass_through():
    d = derive(LatticeParams(2.0, 2.0, 1.0))  # s = 0 so mu = 2 pi / 3
    assert d.mu == pytest.approx(2.0 * math.pi / 3.0, abs=1e-12)
    for n in (3, 6):
        with pytest.raises(CausticError):
            qp.n_step_kernel(n, d)
        with pytest.raises(CausticError):
            qp.n_step_closed_form(n, d)
    # away from the final caustic the iteration crosses the intermediate
    # delta kernel exactly
    for n in (4, 5, 7):
        diff = compare(qp.n_step_kernel(n, d), qp.n_step_closed_form(n, d))
        assert diff.exponent_diff <= 1e-9
        assert diff.amp_ratio_error <= 1e-10


def test_path_independence_uses_the_closure_coefficients(d321):
    co = closure_coeffs(d321)
    res = qp.uniqueness_scan_1form(d321.a, d321.b, co)
    assert res["pass"]
    assert abs(res["amp_ratio"] - 1.0) <= 1e-12


def test_uniqueness_scan_canonical_family(d321):
    co = qp.path_independent_coeffs(d321.a, d321.b, gamma=1.0)
    assert qp.uniqueness_scan_1form(d321.a, d321.b, co)["pass"]
    # the free constants gamma and f drop out of the corner swap
    co2 = qp.path_independent_coeffs(d321.a, d321.b, gamma=2.3, f=0.45)
    assert qp.uniqueness_scan_1form(d321.a, d321.b, co2)["pass"]


def test_uniqueness_scan_requires_every_condition(d321):
    co = qp.path_independent_coeffs(d321.a, d321.b)
    for name in ("alpha", "beta", "a0", "b0"):
        bumped = replace(co, **{name: getattr(co, name) + 1e-3})
        res = qp.uniqueness_scan_1form(d321.a, d321.b, bumped)
        assert not res["pass"]
        assert res["mismatch"] > 1e-5


def test_percent_level_detuning_mismatches_above_1e4(d321):
    # a 1e-2 coefficient perturbation moves the median corner-swap mismatch
    # well above 1e-4
    co = qp.path_independent_coeffs(d321.a, d321.b)
    mismatches = []
    for name in ("alpha", "beta", "a0", "b0"):
        bumped = replace(co, **{name: getattr(co, name) + 1e-2})
        mismatches.append(qp.uniqueness_scan_1form(d321.a, d321.b, bumped)["mismatch"])
    assert float(np.median(mismatches)) > 1e-4


def test_uniqueness_scan_mixed_regimes_rejected():
    with pytest.raises(DegenerateCoeffs):
        qp.path_independent_coeffs(0.5, 1.5)


def test_closure_coeffs_sit_in_the_scan_family(d321):
    # the (P, Q, R) instantiation has the same coefficient ratios as the
    # free-parameter family
    co = closure_coeffs(d321)
    free = qp.path_independent_coeffs(d321.a, d321.b)
    assert co.alpha / co.beta == pytest.approx(free.alpha / free.beta, rel=1e-12)
    assert co.a0 == pytest.approx(free.a0, abs=1e-15)
    assert co.b0 == pytest.approx(free.b0, abs=1e-15)


def test_operator_invariant_identity(d321):
    for direction in ("hat", "bar"):
        for n in range(1, 11):
            assert qp.invariant_kernel_residual(n, d321, direction) <= 1e-12


def test_operator_invariant_identity_values(d321):
    # at one step the exponent coefficients are alpha = (P-Q)/q = 8.5 and
    # gamma = (P+Q)/q = 12.5, and gamma^2 - alpha^2 = 4P exactly
    k = qp.one_step_kernel("hat", d321)
    alpha = k.A[0, 0]
    gamma = k.A[0, 1]
    assert alpha == pytest.approx(8.5, abs=1e-12)
    assert gamma == pytest.approx(12.5, abs=1e-12)
    assert gamma**2 - alpha**2 == pytest.approx(4.0 * d321.P, abs=1e-11)


def test_time_path_validation():
    with pytest.raises(ValueError):
        qp.TimePath(("sideways",))
    with pytest.raises(ValueError):
        qp.path_kernel(qp.TimePath(()), None)


def test_one_step_kernel_canonical_form_is_stable(d321):
    data = qp.one_step_kernel("hat", d321).canonical_dict()
    assert data["vars"] == ["xa", "xb"]
    assert data["A"] == pytest.approx([8.5, 12.5, 12.5, 8.5], abs=1e-13)
    assert data["pihbar_pow"] == "-1/2"
    assert data["amp"]["modulus"] == pytest.approx(math.sqrt(12.5), abs=1e-13)
    assert data["amp"]["phase"] == pytest.approx(math.pi / 4, abs=1e-13)
