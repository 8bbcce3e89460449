import pytest

from src.models.fixedfield import (
    conic_bundle_coordinates,
    inversion_pair_basis,
    omega_eigenbasis,
    three_cycle_basis,
    twisted_inversion_basis,
)
from src.utils.error_handling import DegenerateParameters


@pytest.mark.parametrize("a", [None, 3, "-2/5"])
def test_inversion_pair(a):
    pair = inversion_pair_basis(a)
    assert pair.independent
    assert pair.ok


@pytest.mark.parametrize("values", [{}, {"a": 2, "c": 1, "d": 0}, {"a": -3, "c": "1/2", "d": 5}])
def test_twisted_inversion(values):
    pair = twisted_inversion_basis(**values)
    assert pair.ok


@pytest.mark.parametrize("b", [None, 1, 7])
def test_three_cycle(b):
    pair = three_cycle_basis(b)
    assert pair.ok
    assert pair.checks["order 3"]


def test_omega_eigenvectors():
    pair = omega_eigenbasis()
    assert pair.ok
    assert pair.checks["u eigenvalue omega"]
    assert pair.checks["v eigenvalue omega^-1"]


@pytest.mark.parametrize("f", ["b", "c*x + b", "x^2 - c"])
def test_conic_bundle_coordinates(f):
    pair = conic_bundle_coordinates(f)
    assert pair.checks["norm relation"]
    assert pair.ok


def test_degenerate_parameters():
    with pytest.raises(DegenerateParameters):
        inversion_pair_basis(0)
    with pytest.raises(DegenerateParameters):
        twisted_inversion_basis(a=1, c=0, d=0)
    with pytest.raises(DegenerateParameters):
        three_cycle_basis(0)


def test_report_shape():
    payload = inversion_pair_basis().to_dict()
    assert set(payload) == {"u", "v", "invariant_under", "independent", "checks"}
