import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from idd.algebra import AlgebraSpec, build_table, parse_spec
from idd.derivations import (
    FAMILIES, INFINITE_FAMILIES, LinearMap, WindowTooSmall, check_leibniz, derivation_kernel,
    family_specs, find_family, infinite_family_check, leibniz_matrix, paper_derivations,
    random_kernel_map, random_non_kernel_map, solve_derivations,
)
from idd.linalg import kernel

# Kernel dimensions computed by the solver and cross-checked by direct
# Leibniz evaluation; frozen here as regression oracles.
FROZEN_DIMS = {
    "K0:1:1,0": 2, "K0:6:1,0": 1, "K1:1:1,0": 0, "K1:9:1,0": 1,
    "K0:4:0,-1": 5, "K0:12:0,-1": 13, "K1:3:0,-1": 5, "K1:4:0,-1": 7, "K1:11:0,-1": 13,
    "K0:2:2,0": 6, "K0:7:2,0": 1, "K1:2:2,0": 2, "K1:8:2,0": 1,
    "K0:2:1,1": 2, "K0:5:1,1": 1, "K1:2:1,1": 2, "K1:5:1,1": 1,
    "K0:9:1,-1": 1, "K1:2:1,-1": 2, "K1:10:1,-1": 3,
    "K0:2:-1,-1": 5, "K0:3:-1,-1": 7, "K0:4:-1,-1": 8, "K0:10:-1,-1": 9,
    "K1:4:-1,-1": 10, "K1:5:-1,-1": 12, "K1:6:-1,-1": 14, "K1:7:-1,-1": 15, "K1:12:-1,-1": 16,
    "K0:2:0,-2": 5, "K0:3:0,-2": 7, "K0:8:0,-2": 7,
    "K1:4:0,-2": 10, "K1:5:0,-2": 12, "K1:6:0,-2": 13, "K1:7:0,-2": 13, "K1:12:0,-2": 12,
}


@pytest.mark.parametrize("text, dim", sorted(FROZEN_DIMS.items()))
def test_frozen_kernel_dims(text, dim):
    assert derivation_kernel(parse_spec(text)).dim == dim


def test_dense_and_sparse_systems_agree():
    spec = parse_spec("K1:5:0,-2")
    assert kernel(leibniz_matrix(build_table(spec))) == derivation_kernel(spec)


def test_theorem_instance_matches():
    rep = solve_derivations(parse_spec("K1:10:1,-1"))
    assert rep.kernel_dim == 3 and rep.claimed_dim == 3
    assert rep.span_match and not rep.discrepancies


def test_identity_is_not_a_derivation_but_degree_map_is():
    spec = parse_spec("K1:6:0,0")
    t = build_table(spec)
    ident = LinearMap.from_images(spec, {i: {i: 1} for i in spec.indices})
    degree = LinearMap.from_images(spec, {i: {i: i} for i in spec.indices})
    assert not check_leibniz(t, ident)
    assert check_leibniz(t, degree).ok


def test_lowering_map_fails_on_finite_truncation():
    # d/dx is a derivation of the infinite algebra; truncation drops e_1 e_n = e_n
    # while phi(e_1) e_n = e_0 e_n = e_(n-1) survives.
    rep = solve_derivations(parse_spec("K0:6:1,0"))
    fail = [d for d in rep.discrepancies if d["kind"] == "named_map_fails_leibniz"]
    assert [d["map"] for d in fail] == ["phi"]
    phi = next(nm.map for nm in rep.paper_basis if nm.name == "phi")
    res = check_leibniz(build_table(rep.spec), phi)
    assert not res.ok and list(res.witness) == fail[0]["witness"]


def test_misprinted_map_is_caught_with_witness():
    rep = solve_derivations(parse_spec("K0:8:-1,-1"))
    assert rep.kernel_dim == rep.claimed_dim == 9
    assert [d["map"] for d in rep.discrepancies if d["kind"] == "named_map_fails_leibniz"] == ["psi_2"]
    # The corrected map, read off from the kernel.
    spec = rep.spec
    fixed = LinearMap.from_images(spec, {1: {spec.n - 2: spec.n - 1}, 3: {spec.n: 2}})
    assert check_leibniz(build_table(spec), fixed).ok
    assert rep.kernel.contains(fixed.to_vector())


def test_extra_derivation_is_verified():
    rep = solve_derivations(parse_spec("K1:4:0,-1"))
    extra = [d for d in rep.discrepancies if d["kind"] == "derivation_outside_named_span"]
    assert extra and extra[0]["leibniz_ok"] is True


def test_registry_shape():
    assert len(FAMILIES) == 30 and len(INFINITE_FAMILIES) == 13
    assert find_family(parse_spec("K1:9:-1,-1")).key == "K1:n:-1,-1"
    assert find_family(parse_spec("K1:3:-1,-1")) is None
    assert paper_derivations(parse_spec("K0:5:3,3")) == []
    assert len(family_specs(8)) == len({str(s) for s in family_specs(8)})


def test_linear_map_algebra():
    spec = AlgebraSpec(0, 3, 1, 0)
    a = LinearMap.from_images(spec, {1: {0: 1}, 2: {1: 2}})
    b = LinearMap.from_images(spec, {0: {0: 3}})
    assert LinearMap.from_vector(spec, a.to_vector()) == a
    assert (a + b) - b == a
    assert a.compose(b).image(0) == {}
    assert a.bracket(a) == LinearMap(spec)
    assert a.entry(1, 2) == 2
    assert a.describe() == "e_1 -> 1 e_0; e_2 -> 2 e_1"


@settings(max_examples=25, deadline=None)
@given(st.sampled_from([s for s in family_specs(7)]), st.integers(0, 2**32))
def test_derivations_close_under_bracket(spec, seed):
    rep = solve_derivations(spec)
    rng = random.Random(seed)
    t = build_table(spec)
    a, b = random_kernel_map(rep, rng), random_kernel_map(rep, rng)
    br = a.bracket(b)
    assert check_leibniz(t, br).ok
    assert rep.kernel.contains(br.to_vector())


def test_non_kernel_maps_fail():
    rep = solve_derivations(parse_spec("K1:6:-1,-1"))
    rng = random.Random(3)
    t = build_table(rep.spec)
    for _ in range(20):
        res = check_leibniz(t, random_non_kernel_map(rep, rng))
        assert not res.ok and res.witness is not None


def test_infinite_corollary_on_window():
    r = infinite_family_check(parse_spec("K1:inf@30:-1,-1"))
    assert r["leibniz_ok"] and r["interior_within_corollary"]
    assert r["safe_pairs_checked"] > 0


def test_corollary_generator_count():
    r = infinite_family_check(parse_spec("K1:inf@30:2,0"))
    assert r["generator_count_mismatch"] == {"claimed": 2, "defined": 1}


def test_window_margin_validation():
    with pytest.raises(WindowTooSmall):
        infinite_family_check(parse_spec("K0:inf@30:1,0"), margin=0)
    with pytest.raises(WindowTooSmall):
        infinite_family_check(parse_spec("K0:inf@10:1,0"), margin=9)
