import math

import numpy as np
import pytest

from pnormlab.bounds import (
    UNIVERSAL_C,
    BoundsParams,
    expected_entropy_floor,
    lipschitz_bound,
    product_output_entropy_bound,
    randomizing_norm_bound,
    subspace_dimension_bound,
)
from pnormlab.linalg import BipartiteDims


def test_constant():
    assert UNIVERSAL_C == pytest.approx(1 / (72 * math.pi**3))


@pytest.mark.parametrize("a", [2, 64, 1024, 2**14])
def test_subspace_dimension_at_infinity(a):
    # with 1/p = 0 the |A|^(1/p) factor drops out, leaving a single |B|
    out = subspace_dimension_bound(math.inf, BipartiteDims(a, a))
    want = UNIVERSAL_C / 16 / math.log(10) * a
    assert out.dim_s_real == pytest.approx(want, rel=1e-12)
    assert out.dim_s == math.floor(want)


def test_subspace_finite_order_plugin():
    bp = BoundsParams(alpha=0.3, delta=0.2)
    out = subspace_dimension_bound(3, BipartiteDims(8, 27), bp)
    scale = 8 ** (1 / 3) * 27
    shrink = (2 / 3) ** 2 * 0.09
    assert out.dim_s_real == pytest.approx(UNIVERSAL_C / 4 * shrink / math.log(25) * scale)
    want_log = math.log(2) + 2 * out.dim_s * math.log(25) - UNIVERSAL_C * shrink * scale
    assert out.log_failure_prob_bound == pytest.approx(want_log)


def test_subspace_vacuous_when_small():
    out = subspace_dimension_bound(2, BipartiteDims(4, 4))
    assert out.dim_s == 0 and out.failure_prob_bound > 1 and out.vacuous


def test_subspace_large_dims_become_meaningful():
    out = subspace_dimension_bound(math.inf, BipartiteDims(2**20, 2**20))
    assert out.dim_s > 0
    assert math.isfinite(out.log_failure_prob_bound)


def test_entropy_floor_and_beta():
    out = subspace_dimension_bound(math.inf, BipartiteDims(1024, 1024))
    assert out.beta == 3.0
    assert out.entropy_floor == pytest.approx(math.log(1024) - 3 - 0.5 - math.log(2), abs=1e-12)
    assert expected_entropy_floor(BipartiteDims(16, 64)) == pytest.approx(math.log(16) - 1.5)


def test_subspace_errors():
    for p in (1, 0.5):
        with pytest.raises(ValueError):
            subspace_dimension_bound(p, BipartiteDims(4, 4))
    with pytest.raises(ValueError):
        subspace_dimension_bound(2, BipartiteDims(8, 4))
    with pytest.raises(ValueError):
        BoundsParams(delta=1.0)


def test_lipschitz_values():
    assert lipschitz_bound(2, 4) == pytest.approx(4 * math.sqrt(2))
    assert lipschitz_bound(math.inf, 4) == pytest.approx(4)
    assert lipschitz_bound(1e9, 4) == pytest.approx(4, rel=1e-6)
    with pytest.raises(ValueError):
        lipschitz_bound(1, 4)


GRID = np.concatenate([np.linspace(1.05, 10, 200), np.geomspace(10, 1e6, 100)])


@pytest.mark.parametrize("a", [3, 4, 5, 6, 7])
def test_lipschitz_monotone_for_small_dims(a):
    values = [lipschitz_bound(p, a) for p in GRID]
    assert all(y <= x + 1e-12 for x, y in zip(values, values[1:]))


@pytest.mark.parametrize("a", [8, 24, 1024])
def test_lipschitz_turns_upward_for_larger_dims(a):
    # d/dp ln bound = -1/(p(p-1)) + ln A / (2 p^2) vanishes at p* = ln A / (ln A - 2)
    p_star = math.log(a) / (math.log(a) - 2)
    values = np.array([lipschitz_bound(p, a) for p in GRID])
    assert abs(GRID[np.argmin(values)] - p_star) < 0.1 * p_star
    assert values[-1] > values.min()


def test_product_output_bound():
    dims = BipartiteDims(24, 24)
    assert product_output_entropy_bound(2, dims, 576) == 0
    assert product_output_entropy_bound(2, dims, 192) == pytest.approx(2 * math.log(3))
    assert product_output_entropy_bound(math.inf, dims, 192) == pytest.approx(math.log(3))
    with pytest.raises(ValueError):
        product_output_entropy_bound(1, dims, 192)
    with pytest.raises(ValueError):
        product_output_entropy_bound(2, dims, 0)


def test_randomizing_norm_bound():
    assert randomizing_norm_bound(0, 2, 4) == pytest.approx(0.5**0.75)
    assert randomizing_norm_bound(0, 2, 4) ** 2 == pytest.approx(0.3536, abs=1e-4)
    assert randomizing_norm_bound(0.5, 32, math.inf) == pytest.approx(1.5 / 32)
