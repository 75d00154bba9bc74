from fractions import Fraction

import numpy as np
import pytest

from ubbcert.basis_builder import build_asymmetric_ubb, build_symmetric_ubb, build_upb, missing_states
from ubbcert.entanglement_certify import (
    Certificate,
    SeesawConfig,
    biseparable_overlap_search,
    certify_ppt_deficit,
    certify_prop1,
    certify_prop2,
    certify_prop3,
    genuine_entanglement_check,
    ges_basis,
    product_overlap_search,
    random_rational,
    schmidt_rank,
    verify_fact_I,
    verify_fact_II,
    verify_fact_III,
    verify_fact_IV,
    verify_theorem1_sampled,
)
from ubbcert.exact_linalg import RationalMatrix, RationalVector
from ubbcert.seesaw import exact_overlap, seesaw_trajectory
from ubbcert.subspace_analysis import CUTS, SubspaceProjector, complement_projector, projector_onto

FAST = SeesawConfig(restarts=20, max_iters=300)


def vec(d, entries):
    v = [0] * d**3
    for (p, q, r), c in entries.items():
        v[p * d * d + q * d + r] = c
    return RationalVector.of(v)


# --- Schmidt rank -----------------------------------------------------------------


def test_schmidt_rank_ghz_like():
    v = vec(3, {(0, 0, 0): 1, (1, 1, 1): 1})
    assert [schmidt_rank(v, c) for c in CUTS] == [2, 2, 2]
    assert genuine_entanglement_check(vec(3, {(0, 0, 0): 1, (1, 1, 1): 1, (2, 2, 2): 1}))


def test_schmidt_rank_zero_vector():
    with pytest.raises(ValueError):
        schmidt_rank(RationalVector.zeros(27), "A|BC")
    with pytest.raises(ValueError):
        genuine_entanglement_check(RationalVector.zeros(27))


def test_psi_minus_34_is_biseparable():
    s = next(s for s, _ in build_symmetric_ubb(3).appended if s.label.startswith("psi-_34"))
    assert schmidt_rank(s, "AC|B") == 1
    assert not genuine_entanglement_check(s)


def test_schmidt_rank_cut_reshape_uses_single_party():
    # |0>_A (|01> + |10>)_BC is product across A|BC only
    v = vec(3, {(0, 0, 1): 1, (0, 1, 0): 1})
    assert schmidt_rank(v, "A|BC") == 1
    assert schmidt_rank(v, "AB|C") == 2 and schmidt_rank(v, "AC|B") == 2


def test_random_ges_vectors_are_genuinely_entangled():
    ges = ges_basis(build_symmetric_ubb(3))
    rng = np.random.default_rng(11)
    for _ in range(50):
        v = RationalVector.zeros(27)
        for g in ges:
            v = v + g * random_rational(rng)
        assert genuine_entanglement_check(v)


def test_random_rational_range():
    rng = np.random.default_rng(0)
    for _ in range(200):
        q = random_rational(rng)
        assert q != 0 and abs(q.numerator) <= 97 and q.denominator <= 97


# --- seesaw -----------------------------------------------------------------------


def test_seesaw_config_validation():
    with pytest.raises(ValueError):
        SeesawConfig(convergence_tol=0.5, overlap_threshold=0.4)
    with pytest.raises(ValueError):
        SeesawConfig(restarts=0)
    with pytest.raises(ValueError):
        SeesawConfig(overlap_threshold=1.0)
    with pytest.raises(ValueError):
        SeesawConfig(seed=-1)
    assert SeesawConfig().restarts == 200


def test_identity_projector_overlap_one():
    p = SubspaceProjector(3, RationalMatrix.identity(27), 27)
    assert product_overlap_search(p, FAST).max_overlap == pytest.approx(1.0, abs=1e-12)


def test_single_product_state_found():
    p = projector_onto(3, [RationalVector.basis(27, 0)])
    res = product_overlap_search(p, FAST)
    assert res.max_overlap == pytest.approx(1.0, abs=1e-9)
    assert exact_overlap(p, res.best_state) == pytest.approx(1.0, abs=1e-9)


def test_product_search_on_ce8_stays_below_one():
    ce = complement_projector(build_upb(3))
    res = product_overlap_search(ce, FAST)
    assert res.max_overlap < 1 - 1e-6
    assert abs(float(exact_overlap(ce, res.best_state)) - res.max_overlap) <= 1e-6


def test_biseparable_positive_control():
    ce = complement_projector(build_upb(3))
    res = biseparable_overlap_search(ce, "AB|C", FAST)
    assert res.max_overlap >= 1 - 1e-9


@pytest.mark.parametrize("cut", CUTS)
def test_biseparable_search_ge5(cut):
    ge = complement_projector(build_symmetric_ubb(3))
    assert biseparable_overlap_search(ge, cut, FAST).max_overlap < 1 - 1e-6


def test_best_state_factorizes_and_reproduces_value():
    ge = complement_projector(build_asymmetric_ubb(3, "A|BC"))
    res = biseparable_overlap_search(ge, "AC|B", FAST)
    psi = res.best_state / np.linalg.norm(res.best_state)
    t = np.moveaxis(psi.reshape(3, 3, 3), 1, 0).reshape(3, 9)
    assert np.linalg.matrix_rank(t, tol=1e-9) == 1
    val = np.real(psi.conj() @ ge.matrix.to_float() @ psi)
    assert val == pytest.approx(res.max_overlap, abs=1e-9)


def test_seesaw_deterministic_and_serial_equals_parallel():
    ce = complement_projector(build_upb(3))
    cfg = SeesawConfig(restarts=8, seed=123)
    a = product_overlap_search(ce, cfg)
    b = product_overlap_search(ce, cfg)
    c = product_overlap_search(ce, cfg, jobs=2)
    assert a.per_restart == b.per_restart == c.per_restart
    assert np.array_equal(a.best_state, c.best_state)
    d = product_overlap_search(ce, SeesawConfig(restarts=8, seed=124))
    assert d.per_restart != a.per_restart


@pytest.mark.parametrize("groups", [((0,), (1,), (2,)), ((1,), (0, 2))])
def test_seesaw_monotone_within_runs(groups):
    ce = complement_projector(build_upb(3))
    for index in range(5):
        vals = seesaw_trajectory(ce, 3, groups, SeesawConfig(seed=5), index)
        assert len(vals) >= 3
        assert all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))


# --- facts and theorem --------------------------------------------------------------


@pytest.mark.parametrize("d,span,ges", [(3, 6, 5), (4, 6, 5), (5, 11, 10)])
def test_fact_I(d, span, ges):
    c = verify_fact_I(d)
    assert c.verdict and c.method == "structural-exact"
    assert c.witness["span_missing"] == span and c.witness["ges_dim"] == ges


def test_fact_II_exhaustive_d3():
    c = verify_fact_II(3)
    assert c.verdict and c.witness["subsets"] == 63 and c.method == "exhaustive-exact"


def test_fact_III_exhaustive_d3():
    c = verify_fact_III(3)
    assert c.verdict and c.witness["checks"] == 63 * 3
    assert c.witness["full_set_ranks"] == {"A": 6, "B": 6, "C": 6}


def test_fact_IV_pair_example():
    ubb = build_symmetric_ubb(3)
    ms = {m.label: m for m in missing_states(3).states}
    a, b = ms["psi+_12.L1"].coeffs, ms["psi+_34.L1"].coeffs
    rows = RationalMatrix.stack([s.coeffs for s in ubb.states])
    # both overlap only the stopper, so the complement combination cancels that overlap
    sa, sb = (rows @ a)[len(ubb) - 4], (rows @ b)[len(ubb) - 4]
    combo = a * sb - b * sa
    assert (rows @ combo).is_zero()
    assert all(schmidt_rank(combo, c) >= 2 for c in CUTS)


def test_fact_IV_sampled():
    c = verify_fact_IV(3, samples=10, seed=1)
    assert c.verdict and c.witness["pairs"] == 15 and not c.witness["skipped_pairs"]
    assert c.seed == 1 and c.scope
    with pytest.raises(ValueError):
        verify_fact_IV(3, samples=0)


def test_theorem1_full_projector_rank_six():
    c = verify_theorem1_sampled(3, 5)
    assert c.verdict and c.witness["min_bimarginal_rank"] == 6 and c.claim == "theorem1-full"


@pytest.mark.parametrize("n", [1, 3])
def test_theorem1_sampled(n):
    c = verify_theorem1_sampled(3, n, samples=30, seed=4)
    assert c.verdict and c.witness["min_bimarginal_rank"] >= n + 1
    assert c.method == "sampled-exact" and c.seed == 4


def test_theorem1_bad_n():
    with pytest.raises(ValueError):
        verify_theorem1_sampled(3, 6)
    with pytest.raises(ValueError):
        verify_theorem1_sampled(3, 0)


# --- certificates ------------------------------------------------------------------


def test_numerical_certificate_requires_seed():
    with pytest.raises(ValueError):
        Certificate("prop1", "randomized-numerical", True)
    with pytest.raises(ValueError):
        Certificate("prop1", "guesswork", True)


def test_prop_certificates_agree():
    for certs in (certify_prop1(3, FAST), certify_prop2(3, FAST), certify_prop3(3, "AB|C", FAST)):
        assert {c.method for c in certs} == {"structural-exact", "randomized-numerical"}
        assert all(c.verdict for c in certs)
        for c in certs:
            if c.method == "randomized-numerical":
                assert c.seed == FAST.seed and c.restarts == FAST.restarts


def test_prop1_witness():
    c = certify_prop1(4)[0]
    assert c.witness["states"] == 56 and c.witness["complement_dim"] == 8
    assert c.witness["missing_orthogonal_to_stopper"] == []


def test_ppt_deficit_certificate():
    certs = certify_ppt_deficit(3, FAST)
    assert all(c.verdict for c in certs)
    assert all(v["biseparable_states"] == 4 for v in certs[0].witness["cuts"].values())


def test_certificates_deterministic():
    a = [c.as_dict() for c in certify_prop2(3, SeesawConfig(restarts=5, seed=9))]
    b = [c.as_dict() for c in certify_prop2(3, SeesawConfig(restarts=5, seed=9))]
    assert a == b
    assert verify_fact_IV(3, 3, 2).as_dict() == verify_fact_IV(3, 3, 2).as_dict()


def test_sampled_overlap_exactness():
    ge = complement_projector(build_symmetric_ubb(3))
    res = product_overlap_search(ge, SeesawConfig(restarts=3))
    q = exact_overlap(ge, res.best_state)
    assert isinstance(q, Fraction) and 0 <= q <= 1
