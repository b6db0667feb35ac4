from dataclasses import replace
from functools import lru_cache

import numpy as np
import pytest

from src.moments.basis import build_tensors
from src.physics.model import conserved_to_primitive
from src.runner.verify import (
    check_entropy_conservation,
    check_entropy_gradient,
    check_friction_dissipation,
    check_fluctuation_entropy,
    check_sbp,
    check_tensor_identity,
    check_well_balanced,
    random_states,
    run_property_suite,
)
from src.utils.errors import PropertyViolation


@lru_cache(maxsize=None)
def corrupted_tensors(N):
    T = build_tensors(N)
    A = T.A.copy()
    A[0, 0, 0] += 1e-6
    return replace(T, A=A)


def test_random_states_are_wet(rng):
    u = random_states(rng, 500, 3)
    q = conserved_to_primitive(u)
    assert u.shape == (500, 6)
    assert np.all((q[:, 0] >= 0.1) & (q[:, 0] <= 5.0))
    assert np.all(np.abs(q[:, 1:5]) <= 3.0)


def test_individual_checks_pass(rng):
    assert check_tensor_identity(max_moments=4) <= 1e-13
    assert check_entropy_conservation(rng, samples=200, moments=(1, 2)) <= 1e-12
    assert check_fluctuation_entropy(rng, samples=200) <= 1e-12
    assert check_friction_dissipation(rng, samples=200, moments=(2,)) <= 1e-12
    assert check_entropy_gradient(rng, samples=20) <= 1e-6
    assert check_sbp(max_degree=4) <= 1e-13
    assert check_well_balanced(degrees=(1, 2), elements=(16,)) <= 1e-11


def test_corrupted_tensor_is_reported():
    with pytest.raises(PropertyViolation) as err:
        check_tensor_identity(corrupted_tensors, max_moments=2)
    assert err.value.invariant == "tensor identity"
    assert "N=1" in err.value.detail
    assert "(i,j,k)=(1, 1, 1)" in err.value.detail


def test_property_suite_passes():
    report = run_property_suite(seed=42, samples=100)
    assert report.ok
    assert report.passed == len(report.results) == 7


def test_property_suite_collects_failures():
    report = run_property_suite(seed=3, samples=50, tensor_builder=corrupted_tensors)
    assert not report.ok
    failed = {r.name for r in report.failed}
    assert "tensor identity" in failed
    assert "summation by parts" not in failed
