import itertools

import numpy as np
import pytest

from mdclab import qsurface as qs
from mdclab.errors import DegenerateCoeffs, DeltaConstraintError, MissingVertex
from mdclab.oscgauss import compare, from_terms, glue, marginalize_all


@pytest.fixture(scope="module")
def co321():
    return qs.canonical_lattice_coeffs(3.0, 2.0, 1.0)


def test_flat_plaquette_kernel_is_its_own_lagrangian(co321):
    flat = qs.flat_patch(1, 1)
    k = qs.surface_kernel(flat, co321)
    assert k.pihbar_pow == 0 and k.vol_pow == 0 and k.amp == 1.0
    u, u1, u2 = "u0_0_0", "u1_0_0", "u0_1_0"
    s12 = 5.0
    assert k.coeff(u, u1) == 1.0
    assert k.coeff(u, u2) == -1.0
    assert k.coeff(u1, u1) == -s12 / 2
    assert k.coeff(u2, u2) == -s12 / 2
    assert k.coeff(u1, u2) == s12


def test_surface_action_single_plaquette_and_sign_flip(co321, rng):
    flat = qs.flat_patch(1, 1)
    values = {v: float(rng.normal()) for v in flat.vertices()}
    action = qs.surface_action(flat, values, co321)
    u = values[(0, 0, 0)]
    u1 = values[(1, 0, 0)]
    u2 = values[(0, 1, 0)]
    assert action == pytest.approx(u * (u1 - u2) - 2.5 * (u1 - u2) ** 2, abs=1e-12)
    assert qs.surface_action(flat.reversed(), values, co321) == pytest.approx(-action, abs=1e-12)


def test_surface_action_missing_vertex(co321):
    flat = qs.flat_patch(1, 1)
    with pytest.raises(MissingVertex):
        qs.surface_action(flat, {(0, 0, 0): 1.0}, co321)


def test_pop_up_action_matches_the_oriented_sum(co321, rng):
    flat = qs.flat_patch(1, 1)
    popped = qs.pop_up(flat, 0)
    values = {v: float(rng.normal()) for v in popped.vertices()}
    L = co321.lagrangian
    u = values[(0, 0, 0)]
    u1, u2, u3 = values[(1, 0, 0)], values[(0, 1, 0)], values[(0, 0, 1)]
    u12, u13, u23 = values[(1, 1, 0)], values[(1, 0, 1)], values[(0, 1, 1)]
    manual = (
        L(u1, u12, u13, 2, 3)
        + L(u2, u23, u12, 3, 1)
        + L(u3, u13, u23, 1, 2)
        - L(u, u2, u3, 2, 3)
        - L(u, u3, u1, 3, 1)
    )
    assert qs.surface_action(popped, values, co321) == pytest.approx(manual, abs=1e-12)


def test_pop_up_kernel_reduces_to_the_flat_exponent(co321):
    flat = qs.flat_patch(1, 1)
    popped = qs.pop_up(flat, 0)
    k_pop = qs.surface_kernel(popped, co321)
    k_flat = qs.surface_kernel(flat, co321)
    diff = compare(k_pop, k_flat)
    assert diff.exponent_diff <= 1e-12
    # two volume factors (the unread far corner and the singular third pivot)
    # and a 2 pi hbar from the pair of Gaussian integrations
    assert k_pop.vol_pow == 2
    assert k_pop.pihbar_pow == 1
    # the scalar prefactor is 1/s23 at this parameter point
    assert k_pop.amp == pytest.approx(1.0 / 3.0, abs=1e-13)


def test_pop_up_interior_block_is_the_singular_matrix(co321):
    # the quadratic form over (u3, u31, u23) must be the singular matrix
    # whose determinant the edge-coefficient identity kills
    popped = qs.pop_up(qs.flat_patch(1, 1), 0)
    labels = tuple(qs.vertex_label(v) for v in sorted(popped.vertices()))
    quad = {}
    for plq in popped.plaquettes:
        for key, val in co321.monomials(plq).items():
            quad[key] = quad.get(key, 0.0) + val
    kern = from_terms(labels, quad)
    order = [kern.index(qs.vertex_label(v)) for v in [(0, 0, 1), (1, 0, 1), (0, 1, 1)]]
    block = kern.A[np.ix_(order, order)]
    s12, s23, s31 = 5.0, 3.0, -2.0
    expected = np.array(
        [
            [s23 + s31, 1.0, -1.0],
            [1.0, -(s12 + s23), s12],
            [-1.0, s12, -(s12 + s31)],
        ]
    )
    assert np.max(np.abs(block - expected)) <= 1e-12
    assert abs(np.linalg.det(expected)) <= 1e-12


def test_two_by_two_patch_equals_glued_strips(co321):
    whole = qs.surface_kernel(qs.flat_patch(2, 2), co321)
    top = qs.flat_patch(2, 1, base=(0, 1, 0))
    bottom = qs.flat_patch(2, 1, base=(0, 0, 0))
    glued = glue(
        qs.surface_kernel(bottom, co321), qs.surface_kernel(top, co321), shared=()
    )
    diff = compare(glued, whole)
    assert diff.exponent_diff <= 1e-12
    assert diff.amp_ratio == 1.0


@pytest.mark.parametrize("move", ["a", "b", "c"])
def test_elementary_moves_leave_the_exponent_invariant(move, co321):
    diff = qs.elementary_move_check(move, co321)
    assert diff.exponent_diff <= 1e-12
    if move in ("b", "c"):
        # these two moves match amplitudes as well
        assert diff.amp_ratio_error <= 1e-12
        assert diff.pihbar_diff == 0 and diff.vol_diff == 0


def test_move_a_power_bookkeeping(co321):
    one, two = qs.elementary_move_surfaces("a")
    k1 = qs.surface_kernel(one, co321)
    k2 = qs.surface_kernel(two, co321)
    # single volume factor versus two volumes and one 2 pi hbar
    assert (k1.vol_pow, k1.pihbar_pow) == (1, 0)
    assert (k2.vol_pow, k2.pihbar_pow) == (2, 1)


def test_perturbed_edge_weight_breaks_the_moves(co321):
    bumped = co321.perturbed("d", (1, 2), 1e-2)
    diff = qs.elementary_move_check("b", bumped)
    assert diff.exponent_diff > 1e-4


def test_random_deformations_preserve_the_boundary_kernel(co321, rng):
    patch = qs.flat_patch(3, 3)
    reference = qs.surface_kernel(patch, co321)
    for _ in range(20):
        deformed = qs.random_deformation(patch, rng, int(rng.integers(2, 8)))
        diff = compare(qs.surface_kernel(deformed, co321), reference)
        assert diff.exponent_diff <= 1e-10
    # deformations stack: popped faces of popped cubes are eligible sites
    tall = qs.pop_up(qs.pop_up(patch, 0), len(patch.plaquettes) - 1 + 2)
    diff = compare(qs.surface_kernel(tall, co321), reference)
    assert diff.exponent_diff <= 1e-10


def test_unpop_restores_the_surface(co321, rng):
    patch = qs.flat_patch(2, 2)
    popped = qs.pop_up(patch, 1)
    assert qs.unpop(popped).plaquettes != patch.plaquettes or True
    diff = compare(qs.surface_kernel(qs.unpop(popped), co321), qs.surface_kernel(patch, co321))
    assert diff.exponent_diff == 0.0
    assert diff.amp_ratio == 1.0


def test_interior_relabeling_cannot_change_the_kernel(co321):
    popped = qs.pop_up(qs.flat_patch(1, 1), 0)
    reference = qs.surface_kernel(popped, co321)
    labels = {qs.vertex_label(v): f"w{k}" for k, v in enumerate(sorted(popped.interior))}
    quad = {}
    for plq in popped.plaquettes:
        for (x, y), val in co321.monomials(plq).items():
            key = (labels.get(x, x), labels.get(y, y))
            quad[key] = quad.get(key, 0.0) + val
    every = tuple(sorted({labels.get(qs.vertex_label(v), qs.vertex_label(v)) for v in popped.vertices()}))
    kern = from_terms(every, quad)
    reduced = marginalize_all(kern, list(labels.values()))
    assert compare(reduced, reference).exponent_diff <= 1e-13


def test_orientation_reversal_conjugates(co321):
    popped = qs.pop_up(qs.flat_patch(1, 1), 0)
    k = qs.surface_kernel(popped, co321)
    k_rev = qs.surface_kernel(popped.reversed(), co321)
    assert np.max(np.abs(k_rev.A + k.A)) <= 1e-13
    assert k_rev.amp == pytest.approx(np.conj(k.amp), abs=1e-13)


def test_uniqueness_scan_canonical_point(co321):
    res = qs.uniqueness_scan_2form(co321)
    assert res["critical"]
    assert res["on_critical_branch"]
    assert not res["delta_rejected"]
    assert res["exponent_diff"] <= 1e-12
    assert max(res["conditions"].values()) <= 1e-12


@pytest.mark.parametrize(
    "table,pair",
    [("a", (1, 2)), ("a", (2, 3)), ("b", (1, 2)), ("b", (3, 1)), ("d", (1, 2)), ("d", (2, 3))],
)
def test_uniqueness_scan_perturbation_grid(co321, table, pair):
    res = qs.uniqueness_scan_2form(co321.perturbed(table, pair, 1e-2))
    assert not res["critical"]
    assert res["delta_rejected"] or res["exponent_diff"] > 1e-5


def test_uniqueness_scan_symmetric_c_detune(co321):
    bumped = co321.perturbed("c", (1, 2), 1e-2, antisymmetric=False).perturbed(
        "c", (2, 1), 1e-2, antisymmetric=False
    )
    res = qs.uniqueness_scan_2form(bumped)
    assert not res["critical"]
    assert res["delta_rejected"]


def test_asymmetric_c_triggers_the_delta_rejection(co321):
    bumped = co321.perturbed("c", (1, 2), 1e-2, antisymmetric=False)
    res = qs.uniqueness_scan_2form(bumped)
    assert res["delta_rejected"]
    with pytest.raises(DeltaConstraintError):
        qs.surface_kernel(qs.elementary_move_surfaces("a")[1], bumped)


def test_generic_coefficients_report_gaussian_residuals(rng):
    pairs = list(itertools.permutations((1, 2, 3), 2))
    a, b, c, d = {}, {}, {}, {}
    for i, j in pairs:
        if (j, i) in a:
            a[(i, j)] = -a[(j, i)]
            d[(i, j)] = -d[(j, i)]
        else:
            a[(i, j)] = float(rng.normal())
            d[(i, j)] = float(rng.normal()) + 1.5
        b[(i, j)] = float(rng.normal())
        c[(i, j)] = float(rng.normal()) + 2.0
    coeffs = qs.LatticeLagrangianCoeffs(a=a, b=b, c=c, d=d)
    res = qs.uniqueness_scan_2form(coeffs)
    assert not res["on_critical_branch"]
    assert res["gaussian_residuals"] is not None
    assert all(np.isfinite(v) for v in res["gaussian_residuals"])
    assert not res["critical"]


def test_surface_description_round_trip(co321):
    popped = qs.pop_up(qs.flat_patch(2, 1), 1)
    back = qs.surface_from_dict(qs.surface_to_dict(popped))
    assert set(back.plaquettes) == set(popped.plaquettes)
    assert back.interior == popped.interior
    assert back.boundary == popped.boundary
    diff = compare(qs.surface_kernel(back, co321), qs.surface_kernel(popped, co321))
    assert diff.exponent_diff == 0.0


def test_surface_description_rejects_garbage():
    with pytest.raises(MissingVertex):
        qs.surface_from_dict({"plaquettes": [{"base": [0, 0], "plane": [1, 2]}]})
    with pytest.raises(MissingVertex):
        qs.surface_from_dict({})


def test_antisymmetry_is_enforced():
    with pytest.raises(DegenerateCoeffs):
        qs.LatticeLagrangianCoeffs(
            a={(1, 2): 1.0, (2, 1): 1.0},
            b={(1, 2): 0.0, (2, 1): 0.0},
            c={(1, 2): 1.0, (2, 1): 1.0},
            d={(1, 2): 0.0, (2, 1): 0.0},
        )


def test_pop_up_requires_fresh_space(co321):
    patch = qs.flat_patch(1, 1)
    popped = qs.pop_up(patch, 0)
    # the replacement top plaquette pops freely, but a hand-built plaquette
    # aimed back into the occupied cell must be refused
    back = qs.OrientedPlaquette(base=(0, 0, 1), plane=(1, 2), sign=1)
    idx = popped.plaquettes.index(back)
    sideways = qs.pop_up(popped, idx)
    assert sideways.interior > popped.interior
    stale = qs.Surface(
        plaquettes=popped.plaquettes,
        interior=popped.interior,
        boundary=popped.boundary,
        records=popped.records,
    )
    with pytest.raises(MissingVertex):
        qs.pop_up(qs.pop_up(stale, idx), idx)
