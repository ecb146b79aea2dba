"""Grid geometry, node classification and flow-stencil interpolation."""

import numpy as np
import pytest

from carnotpde.grid import (
    FlowStencil,
    GridFunction,
    GridSpec,
    StencilBank,
    build_stencil,
    classify_nodes,
)


@pytest.fixture
def square():
    return GridSpec(box=((0, 1), (0, 2)), cells=(4, 8), horizon=1.0)


def test_grid_spec_validation():
    with pytest.raises(ValueError):
        GridSpec(box=((0, 1),), cells=(4, 4))
    with pytest.raises(ValueError):
        GridSpec(box=((1, 0),), cells=(4,))
    with pytest.raises(ValueError):
        GridSpec(box=((0, 1),), cells=(1,))
    with pytest.raises(ValueError):
        GridSpec(box=((0, 1),), cells=(4,), horizon=0.0)


def test_grid_geometry(square):
    assert square.ndim == 2
    assert square.shape == (5, 9)
    assert square.node_count == 45
    assert np.allclose(square.spacings, [0.25, 0.25])
    assert square.delta == 0.25
    coords = square.coords()
    assert coords.shape == (45, 2)
    # lexicographic: first axis slowest
    assert np.allclose(coords[0], [0, 0])
    assert np.allclose(coords[1], [0, 0.25])
    assert np.allclose(coords[-1], [1, 2])


def test_lateral_mask_counts(square):
    mask = square.lateral_mask()
    # 5x9 grid: boundary of the rectangle has 2*5 + 2*9 - 4 nodes
    assert mask.sum() == 2 * 5 + 2 * 9 - 4


def test_classify_nodes(square):
    tags0 = classify_nodes(square, 0.0)
    assert (tags0 == "parabolic_boundary").all()
    tags = classify_nodes(square, 0.5)
    assert (tags == "parabolic_boundary").sum() == square.lateral_mask().sum()
    corner = 0
    center = np.ravel_multi_index((2, 4), square.shape)
    assert tags[corner] == "parabolic_boundary"
    assert tags[center] == "interior"


def test_grid_function_validation(square):
    with pytest.raises(ValueError):
        GridFunction(square, np.zeros(7))
    bad = np.zeros(square.node_count)
    bad[3] = np.nan
    with pytest.raises(ValueError):
        GridFunction(square, bad)
    gf = GridFunction(square, np.arange(square.node_count, dtype=float))
    assert gf.reshaped().shape == square.shape
    assert gf.sup_norm() == square.node_count - 1


def test_stencil_exact_on_grid_nodes(square):
    coords = square.coords()
    values = coords[:, 0] + 3.0 * coords[:, 1]
    st = build_stencil(square, coords[[7, 20, 33]])
    assert np.allclose(st.evaluate(values), values[[7, 20, 33]])
    assert st.outside_rows.size == 0


def test_stencil_exact_for_multilinear_functions(square):
    # multilinear interpolation reproduces a + bx + cy + dxy exactly
    coords = square.coords()
    values = 1.0 + 2.0 * coords[:, 0] - coords[:, 1] + 0.5 * np.prod(coords, axis=1)
    rng = np.random.default_rng(0)
    targets = rng.uniform((0, 0), (1, 2), size=(40, 2))
    st = build_stencil(square, targets)
    expect = 1.0 + 2.0 * targets[:, 0] - targets[:, 1] + 0.5 * np.prod(targets, axis=1)
    assert np.abs(st.evaluate(values) - expect).max() <= 1e-12


def test_stencil_weights_are_convex(square):
    rng = np.random.default_rng(1)
    targets = rng.uniform((0, 0), (1, 2), size=(25, 2))
    st = build_stencil(square, targets)
    assert (st.weights >= -1e-15).all()
    assert np.allclose(st.weights.sum(axis=1), 1.0)


def test_off_box_targets_use_clamped_datum(square):
    targets = np.array([[-0.5, 1.0], [0.5, 2.7]])
    st = build_stencil(square, targets)
    assert set(st.outside_rows) == {0, 1}
    assert np.allclose(st.clamped, [[0.0, 1.0], [0.5, 2.0]])
    values = np.zeros(square.node_count)
    out = st.evaluate(values, boundary_values=np.array([7.0, 9.0]))
    assert out.tolist() == [7.0, 9.0]
    with pytest.raises(ValueError, match="datum"):
        st.evaluate(values)


def test_stencil_bank_matches_individual_stencils(square):
    coords = square.coords()
    values = np.cos(coords[:, 0]) + coords[:, 1] ** 2
    rng = np.random.default_rng(2)
    target_list = [rng.uniform((0, 0), (1, 2), size=(45, 2)) for _ in range(3)]
    bank = StencilBank.from_targets(square, target_list)
    batch = bank.evaluate(values)
    for d, targets in enumerate(target_list):
        single = build_stencil(square, targets).evaluate(values)
        assert np.allclose(batch[d], single)


def test_stencil_bank_datum_cache(square):
    values = np.zeros(square.node_count)
    targets = np.array([[-0.5, 1.0], [0.5, 1.0]])
    bank = StencilBank.from_targets(square, [targets])
    datum = lambda pts, t: 5.0 + pts[:, 1] + t
    cache = bank.datum_cache(datum, 2.0)
    out = bank.evaluate(values, datum_cache=cache)
    assert out[0, 0] == pytest.approx(8.0)
    assert out[0, 1] == pytest.approx(0.0)
