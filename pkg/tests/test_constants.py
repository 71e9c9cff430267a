import math

import scipy.constants

from blockadesim.constants import BOHR_RADIUS, HARTREE, HBAR, TWO_PI


def test_hbar_follows_from_exact_planck_constant():
    assert HBAR == 6.62607015e-34 / (2.0 * math.pi)


def test_hbar_matches_scipy():
    assert abs(HBAR - scipy.constants.hbar) / scipy.constants.hbar < 1e-9


def test_bohr_radius_matches_scipy():
    ref = scipy.constants.physical_constants["Bohr radius"][0]
    assert abs(BOHR_RADIUS - ref) / ref < 1e-9


def test_hartree_matches_scipy():
    ref = scipy.constants.physical_constants["Hartree energy"][0]
    assert abs(HARTREE - ref) / ref < 1e-9


def test_two_pi():
    assert TWO_PI == 2.0 * math.pi
