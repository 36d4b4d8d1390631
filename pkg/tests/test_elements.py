import math

import numpy as np
import pytest

from fredkinlab import (
    Bs,
    DelayToL,
    ElementError,
    Hwp,
    HvSwap,
    Pbs,
    Phase,
    PhotonicState,
    Rot,
    Route,
    Rpbs,
    apply_unitary,
    compile_element,
    compose,
    hwp_matrix,
    register_modes,
)
from fredkinlab.elements import bs_block, pbs_unitary, rot_block, rpbs_unitary

S2 = 1 / math.sqrt(2)


# -- half-wave plate: the published transformations, exactly -----------------

def test_hwp_67_5_maps_h_to_minus_h_plus_v():
    m = hwp_matrix(67.5)
    # columns are inputs (H, V); rows outputs
    assert np.allclose(m[:, 0], [-S2, S2], atol=1e-12)


def test_hwp_67_5_maps_v_to_h_plus_v():
    m = hwp_matrix(67.5)
    assert np.allclose(m[:, 1], [S2, S2], atol=1e-12)


def test_hwp_22_5_maps_h_to_h_plus_v():
    m = hwp_matrix(22.5)
    assert np.allclose(m[:, 0], [S2, S2], atol=1e-12)


def test_hwp_22_5_maps_v_to_h_minus_v():
    m = hwp_matrix(22.5)
    assert np.allclose(m[:, 1], [S2, -S2], atol=1e-12)


def test_hwp_45_swaps_h_and_v():
    m = hwp_matrix(45.0)
    assert np.allclose(m, [[0, 1], [1, 0]], atol=1e-12)


@pytest.mark.parametrize("theta", [0.0, 10.0, 22.5, 45.0, 67.5, 90.0, 123.4])
def test_hwp_is_real_symmetric_involution(theta):
    m = hwp_matrix(theta)
    assert np.allclose(m.imag, 0)
    assert np.allclose(m, m.T)
    assert np.allclose(m @ m, np.eye(2), atol=1e-12)


def test_hwp_angle_mod_180():
    assert np.allclose(hwp_matrix(22.5), hwp_matrix(202.5), atol=1e-12)


# -- PBS ----------------------------------------------------------------------

def test_pbs_transmits_h_reflects_v():
    reg = register_modes(["a", "b"])
    u = pbs_unitary(reg, "a", "b")
    s = PhotonicState.from_occupation(reg, (1, 0, 0, 0))  # H_a
    out = apply_unitary(s, u)
    assert out.amps == {(1, 0, 0, 0): 1.0 + 0j}
    s = PhotonicState.from_occupation(reg, (0, 1, 0, 0))  # V_a
    out = apply_unitary(s, u)
    assert out.amps == {(0, 0, 0, 1): 1.0 + 0j}  # V_b, amplitude +1


def test_pbs_splits_h_and_v_of_one_beam():
    reg = register_modes(["a", "b"])
    u = pbs_unitary(reg, "a", "b")
    s = PhotonicState.from_occupation(reg, (1, 1, 0, 0))  # H_a and V_a
    out = apply_unitary(s, u)
    assert out.amps == {(1, 0, 0, 1): 1.0 + 0j}


def test_pbs_is_permutation_matrix():
    reg = register_modes(["a", "b"])
    m = pbs_unitary(reg, "a", "b").matrix
    assert np.allclose(np.abs(m) @ np.ones(4), np.ones(4))
    assert np.allclose(np.sort(np.abs(m), axis=0)[-1], 1.0)


# -- BS -----------------------------------------------------------------------

def test_bs_block_balanced():
    b = bs_block(0.5, "b")
    assert np.allclose(b, [[S2, S2], [S2, -S2]], atol=1e-12)


def test_bs_single_photon_splits():
    reg = register_modes(["a", "b"])
    u = compile_element(reg, Bs(0.5, ("a", "H"), ("b", "H")))
    out = apply_unitary(PhotonicState.from_occupation(reg, (1, 0, 0, 0)), u)
    assert out.amps[(1, 0, 0, 0)] == pytest.approx(S2)
    assert out.amps[(0, 0, 1, 0)] == pytest.approx(S2)


def _brute_force_permanent(m):
    import itertools
    n = m.shape[0]
    if n == 0:
        return 1.0 + 0j
    return sum(
        np.prod([m[i, p[i]] for i in range(n)])
        for p in itertools.permutations(range(n))
    )


def test_bs_hong_ou_mandel_against_permanent():
    # expected amplitudes derived from the brute-force permanent of the
    # occupation-repeated 2x2 block
    b = bs_block(0.5, "b")
    amp_20 = _brute_force_permanent(np.array([[b[0, 0], b[0, 1]], [b[0, 0], b[0, 1]]])) / math.sqrt(2)
    amp_02 = _brute_force_permanent(np.array([[b[1, 0], b[1, 1]], [b[1, 0], b[1, 1]]])) / math.sqrt(2)
    amp_11 = _brute_force_permanent(b)
    assert amp_20 == pytest.approx(S2)
    assert amp_02 == pytest.approx(-S2)
    assert amp_11 == pytest.approx(0.0, abs=1e-12)

    reg = register_modes(["a", "b"])
    u = compile_element(reg, Bs(0.5, ("a", "H"), ("b", "H")))
    out = apply_unitary(PhotonicState.from_occupation(reg, (1, 0, 1, 0)), u)
    assert out.amps[(2, 0, 0, 0)] == pytest.approx(amp_20)
    assert out.amps[(0, 0, 2, 0)] == pytest.approx(amp_02)
    assert (1, 0, 1, 0) not in out.amps


def test_bs_eta_third_amplitudes():
    b = bs_block(1 / 3, "b")
    assert b[0, 0] == pytest.approx(math.sqrt(2 / 3))
    assert b[0, 1] == pytest.approx(math.sqrt(1 / 3))


def test_bs_eta_limits():
    assert np.allclose(bs_block(0.0, "b"), [[1, 0], [0, -1]])
    assert np.allclose(bs_block(1.0, "b"), [[0, 1], [1, 0]])


def test_bs_rejects_bad_reflectivity():
    with pytest.raises(ElementError):
        bs_block(1.5)


def test_bs_on_beams_acts_per_polarization():
    reg = register_modes(["a", "b"])
    u = compile_element(reg, Bs(0.5, "a", "b"))
    out = apply_unitary(PhotonicState.from_occupation(reg, (0, 1, 0, 0)), u)
    assert out.amps[(0, 1, 0, 0)] == pytest.approx(S2)
    assert out.amps[(0, 0, 0, 1)] == pytest.approx(S2)


# -- RPBS ----------------------------------------------------------------------

def test_rpbs_transmits_plus_reflects_minus():
    reg = register_modes(["a", "b"])
    u = rpbs_unitary(reg, "a", "b")
    plus_a = PhotonicState(reg, {(1, 0, 0, 0): S2, (0, 1, 0, 0): S2})
    out = apply_unitary(plus_a, u)
    assert out.amps[(1, 0, 0, 0)] == pytest.approx(S2)
    assert out.amps[(0, 1, 0, 0)] == pytest.approx(S2)
    minus_a = PhotonicState(reg, {(1, 0, 0, 0): S2, (0, 1, 0, 0): -S2})
    out = apply_unitary(minus_a, u)
    assert out.amps.keys() == {(0, 0, 1, 0), (0, 0, 0, 1)}
    assert out.amps[(0, 0, 1, 0)] == pytest.approx(S2)
    assert out.amps[(0, 0, 0, 1)] == pytest.approx(-S2)


def test_rpbs_equals_hwp_sandwich():
    reg = register_modes(["a", "b"])
    sandwich = compose(reg, [Hwp("a", 22.5), Hwp("b", 22.5), Pbs("a", "b"),
                             Hwp("a", 22.5), Hwp("b", 22.5)])
    direct = compile_element(reg, Rpbs("a", "b"))
    assert np.max(np.abs(sandwich.matrix - direct.matrix)) < 1e-12


def test_rpbs_permutation_like_in_its_eigenbasis():
    # conjugating by the 22.5-degree plates exposes the +/- routing: one unit
    # entry per row/column, exactly like a PBS in H/V
    reg = register_modes(["a", "b"])
    plates = compose(reg, [Hwp("a", 22.5), Hwp("b", 22.5)]).matrix
    m = plates @ compile_element(reg, Rpbs("a", "b")).matrix @ plates
    assert np.allclose(np.abs(m) @ np.ones(4), np.ones(4), atol=1e-12)
    assert np.allclose(np.sort(np.abs(m), axis=0)[-1], 1.0, atol=1e-12)


# -- other elements -------------------------------------------------------------

def test_hv_swap_equals_hwp45():
    reg = register_modes(["a"])
    assert np.allclose(compile_element(reg, HvSwap("a")).matrix,
                       compile_element(reg, Hwp("a", 45.0)).matrix)


def test_route_permutes_beams():
    reg = register_modes(["a", "b"])
    u = compile_element(reg, Route((("a", "b"), ("b", "a"))))
    out = apply_unitary(PhotonicState.from_occupation(reg, (0, 1, 0, 0)), u)
    assert out.amps == {(0, 0, 0, 1): 1.0 + 0j}


def test_route_rejects_non_permutation():
    reg = register_modes(["a", "b"])
    with pytest.raises(ElementError):
        compile_element(reg, Route((("a", "b"),)))


def test_delay_moves_s_to_l():
    reg = register_modes(["a"], time_resolved=True)
    u = compile_element(reg, DelayToL("a"))
    out = apply_unitary(PhotonicState.from_occupation(reg, (1, 0, 0, 0)), u)
    assert out.amps == {(0, 1, 0, 0): 1.0 + 0j}


def test_delay_needs_time_resolved_registry():
    reg = register_modes(["a"])
    with pytest.raises(ElementError):
        compile_element(reg, DelayToL("a"))


def test_hwp_acts_on_both_time_bins():
    reg = register_modes(["a"], time_resolved=True)
    u = compile_element(reg, Hwp("a", 45.0))
    out = apply_unitary(PhotonicState.from_occupation(reg, (0, 1, 0, 0)), u)  # H^L
    assert out.amps == {(0, 0, 0, 1): 1.0 + 0j}  # V^L


def test_phase_on_mode_and_beam():
    reg = register_modes(["a"])
    u = compile_element(reg, Phase(("a", "V"), math.pi))
    out = apply_unitary(PhotonicState.from_occupation(reg, (0, 1)), u)
    assert out.amps[(0, 1)] == pytest.approx(-1.0)
    u = compile_element(reg, Phase("a", math.pi / 2))
    out = apply_unitary(PhotonicState.from_occupation(reg, (1, 0)), u)
    assert out.amps[(1, 0)] == pytest.approx(1j)


def test_rot_block_is_rotation():
    r = rot_block(0.3)
    assert np.allclose(r @ r.T, np.eye(2), atol=1e-12)
    assert np.linalg.det(r).real == pytest.approx(1.0)


# -- composition ----------------------------------------------------------------

def test_compose_empty_is_identity():
    reg = register_modes(["a", "b"])
    assert np.allclose(compose(reg, []).matrix, np.eye(4))


def test_compose_application_order():
    reg = register_modes(["a"])
    # HWP(22.5) then HWP(45) on the same beam: matrix product in that order
    u = compose(reg, [Hwp("a", 22.5), Hwp("a", 45.0)])
    assert np.allclose(u.matrix, hwp_matrix(45.0) @ hwp_matrix(22.5))
    s = PhotonicState.from_occupation(reg, (1, 0))
    step = apply_unitary(apply_unitary(s, compose(reg, [Hwp("a", 22.5)])),
                         compose(reg, [Hwp("a", 45.0)]))
    once = apply_unitary(s, u)
    assert step.amps.keys() == once.amps.keys()
    for occ in step.amps:
        assert once.amps[occ] == pytest.approx(step.amps[occ])


@pytest.mark.parametrize("elements", [
    [Hwp("a", 67.5), Pbs("a", "b"), Bs(1 / 3, "a", "b"), Rpbs("a", "b")],
    [Bs(0.7, ("a", "H"), ("b", "V"), "a"), Phase("b", 1.1), Rot(0.4, ("a", "V"), ("b", "H"))],
])
def test_compositions_are_unitary(elements):
    reg = register_modes(["a", "b"])
    u = compose(reg, elements)
    assert u.unitarity_deviation() < 1e-12
