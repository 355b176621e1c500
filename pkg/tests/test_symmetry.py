import numpy as np
import pytest

from fracchoquard.errors import IncompatibleSpec
from fracchoquard.spectral import Field, make_grid
from fracchoquard.symmetry import (
    SymmetryKind,
    SymmetrySpec,
    radialize,
    recenter,
    sign_normalize,
    symmetrize,
)

SPECS = [
    (2, SymmetrySpec(SymmetryKind.RADIAL)),
    (3, SymmetrySpec(SymmetryKind.RADIAL)),
    (2, SymmetrySpec(SymmetryKind.ODD_SWAP, 1)),
    (3, SymmetrySpec(SymmetryKind.BLOCK_RADIAL, 1)),
    (4, SymmetrySpec(SymmetryKind.ODD_SWAP, 2)),
]


def test_radial_profile_unchanged():
    g = make_grid(3, 24, 5.0)
    u = Field(g, np.exp(-g.radius() ** 2) * np.cos(g.radius()))
    assert np.max(np.abs(radialize(u).values - u.values)) < 1e-13 * np.max(np.abs(u.values))


def test_odd_swap_kills_even_field():
    g = make_grid(2, 32, 5.0)
    x, y = g.coords()
    u = Field(g, np.exp(-(x**2) - 2 * y**2) + np.exp(-2 * x**2 - y**2))
    out = symmetrize(u, SymmetrySpec(SymmetryKind.ODD_SWAP, 1))
    assert np.max(np.abs(out.values)) < 1e-15


@pytest.mark.parametrize("dim, spec", SPECS)
def test_projection_idempotent(dim, spec):
    rng = np.random.default_rng(dim)
    n = {2: 24, 3: 12, 4: 8}[dim]
    g = make_grid(dim, n, 3.0)
    for _ in range(50):
        u = Field(g, rng.standard_normal(g.shape))
        once = symmetrize(u, spec)
        twice = symmetrize(once, spec)
        assert (twice - once).norm() < 1e-13 * u.norm()


@pytest.mark.parametrize("dim, spec", SPECS)
def test_projection_is_orthogonal(dim, spec):
    rng = np.random.default_rng(10 + dim)
    n = {2: 24, 3: 12, 4: 8}[dim]
    g = make_grid(dim, n, 3.0)
    u, v = (Field(g, rng.standard_normal(g.shape)) for _ in range(2))
    pu, pv = symmetrize(u, spec), symmetrize(v, spec)
    assert abs(np.vdot(pu.values, v.values) - np.vdot(u.values, pv.values)) < 1e-10


def test_parse_and_check():
    assert SymmetrySpec.parse("radial").kind == SymmetryKind.RADIAL
    assert SymmetrySpec.parse("odd-swap:2") == SymmetrySpec(SymmetryKind.ODD_SWAP, 2)
    assert SymmetrySpec.parse("Block_Radial:1") == SymmetrySpec(SymmetryKind.BLOCK_RADIAL, 1)
    for text in ("spherical", "odd-swap", "odd-swap:x"):
        with pytest.raises(IncompatibleSpec):
            SymmetrySpec.parse(text)
    with pytest.raises(IncompatibleSpec):
        SymmetrySpec(SymmetryKind.ODD_SWAP, 2).check(3)
    g = make_grid(1, 16, 1.0)
    with pytest.raises(IncompatibleSpec):
        symmetrize(Field(g, np.ones(16)), SymmetrySpec(SymmetryKind.ODD_SWAP, 1))


def test_demonstration_flag():
    odd = SymmetrySpec(SymmetryKind.ODD_SWAP, 1)
    assert odd.is_demonstration(2)
    assert not SymmetrySpec(SymmetryKind.ODD_SWAP, 2).is_demonstration(4)
    assert SymmetrySpec(SymmetryKind.ODD_SWAP, 2).is_demonstration(5)
    assert not SymmetrySpec(SymmetryKind.RADIAL).is_demonstration(2)


def test_recenter_and_sign():
    g = make_grid(2, 32, 4.0)
    x, y = g.coords()
    u = Field(g, -np.exp(-((x - 1.0) ** 2) - (y + 0.5) ** 2))
    c = recenter(sign_normalize(u))
    peak = np.unravel_index(np.argmax(c.values), g.shape)
    assert all(k in (15, 16) for k in peak)
    assert np.max(c.values) > 0
    assert recenter(c) is c
