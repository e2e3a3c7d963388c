import numpy as np
import pytest

from relayquant import (
    FiniteCodebook,
    PowerDependentSpec,
    SrsSpec,
    analyze_codebook,
    apply_unitary,
    diversity_cap,
    hitting_sets,
    is_admissible,
    is_omrs,
    is_srs,
    make_srs,
    max_pairwise_overlap,
    min_max_weight,
)
from relayquant.structure import convergence_diagnostic, fit_log_decay
from tests.conftest import U1, U2


def _sets(cb):
    return set(hitting_sets(cb).sets)


def test_hitting_sets_worked_examples(cb_c1, cb_c2, cb_c3):
    assert _sets(cb_c1) == {(2,), (3,), (1, 2), (2, 3), (1, 3), (1, 2, 3)}
    assert _sets(cb_c2) == {(3,), (1, 2), (2, 3), (1, 3), (1, 2, 3)}
    assert _sets(cb_c3) == {(1, 2), (2, 3), (1, 3), (1, 2, 3)}


def test_hitting_sets_srs_only_full_set():
    assert _sets(make_srs(3, np.zeros(3))) == {(1, 2, 3)}


def test_hitting_sets_enumeration_cap():
    big = FiniteCodebook(np.ones((1, 21), dtype=complex) * 0.5)
    with pytest.raises(ValueError, match="enumeration cap"):
        hitting_sets(big)


def test_hitting_sets_upward_closed(cb_c1, cb_c2, cb_c3):
    for cb in (cb_c1, cb_c2, cb_c3):
        col = hitting_sets(cb)
        members = set(col.sets)
        for s in col.sets:
            free = [r for r in range(1, cb.relay_count + 1) if r not in s]
            for extra in free:
                assert tuple(sorted(s + (extra,))) in members


def test_min_max_weight_values(cb_c5):
    two = FiniteCodebook(np.array([[0, 1, 1], [1, 0, 1]], dtype=complex))
    assert min_max_weight(two, {3}) == pytest.approx(1.0)
    # admissible codebook over the full index set always yields 1
    assert min_max_weight(cb_c5, {1, 2, 3, 4}) == pytest.approx(1.0)
    # pinned-coordinate families keep at least epsilon on the pinned relay
    pinned = FiniteCodebook(np.array([[0.5, 1.0], [0.6, 0.2]], dtype=complex))
    assert min_max_weight(pinned, {1}) >= 0.25
    with pytest.raises(ValueError):
        min_max_weight(two, set())


def test_diversity_caps_worked_examples(cb_c1, cb_c2, cb_c3):
    assert diversity_cap(cb_c1) == (1, (2,))
    assert diversity_cap(cb_c2) == (1, (3,))
    cap, witness = diversity_cap(cb_c3)
    assert cap == 2 and witness in {(1, 2), (1, 3), (2, 3)}


def test_diversity_cap_unitary_transforms():
    srs = make_srs(3, np.zeros(3))
    assert diversity_cap(srs)[0] == 3
    assert diversity_cap(apply_unitary(srs, U1))[0] == 2
    assert diversity_cap(apply_unitary(srs, U2))[0] == 1


def test_diversity_cap_rejects_zero_vector():
    cb = FiniteCodebook(np.array([[0, 0], [1, 0]], dtype=complex))
    with pytest.raises(ValueError, match="zero vector"):
        diversity_cap(cb)


def test_diversity_cap_monotone_under_growth():
    gen = np.random.default_rng(13)
    for _ in range(50):
        r = int(gen.integers(2, 5))
        k = int(gen.integers(1, 4))
        base = gen.uniform(0.1, 1.0, (k, r)) * (gen.uniform(0, 1, (k, r)) > 0.4)
        base[:, 0] = np.maximum(base[:, 0], 0.1)  # no zero vectors
        cb = FiniteCodebook(base.astype(complex))
        grown = FiniteCodebook(np.vstack([base, gen.uniform(0.1, 1.0, (1, r))]).astype(complex))
        assert diversity_cap(grown)[0] >= diversity_cap(cb)[0]


def test_omrs_membership(cb_c3, cb_c5):
    assert is_omrs(cb_c5)
    assert is_omrs(make_srs(4, np.ones(4)))
    assert not is_omrs(cb_c3)
    single = FiniteCodebook(np.array([[0.5, 0.5]], dtype=complex))
    assert is_omrs(single)


def test_srs_membership(cb_c5):
    for theta in (np.zeros(3), np.array([0.4, -2.0, 1.1])):
        assert is_srs(make_srs(3, theta))
    assert not is_srs(cb_c5)
    # three entries for two relays: a duplicated selection vector is not SRS
    dup = FiniteCodebook(np.array([[1, 0], [0, 1], [1, 0]], dtype=complex))
    assert not is_srs(dup)
    dup_phase = FiniteCodebook(np.array([[1, 0], [-1, 0]], dtype=complex))
    assert not is_srs(dup_phase)


def test_srs_omrs_equivalence_at_full_cardinality():
    gen = np.random.default_rng(19)
    for _ in range(50):
        r = int(gen.integers(2, 5))
        if gen.uniform() < 0.5:
            cb = make_srs(r, gen.uniform(0, 2 * np.pi, r))
        else:
            mat = gen.uniform(0, 1, (r, r)).astype(complex)
            mat[:, 0] = np.maximum(mat[:, 0], 0.05)
            mat = mat / np.abs(mat).max(axis=1, keepdims=True)
            cb = FiniteCodebook(mat)
        if is_admissible(cb):
            assert (is_omrs(cb) and len(cb) == r) == is_srs(cb)


def test_admissibility(cb_c5):
    assert is_admissible(cb_c5)
    assert not is_admissible(FiniteCodebook(np.array([[0.5, 0.5]], dtype=complex)))
    srs = make_srs(3, np.zeros(3))
    assert not is_admissible(apply_unitary(srs, U1))  # two rows peak at 1/sqrt(2)
    assert not is_admissible(apply_unitary(srs, U2))


def test_overlap_statistic(cb_c3, cb_c5, cb_o1):
    assert max_pairwise_overlap(cb_c5) == 0.0
    assert max_pairwise_overlap(cb_o1) == 0.0
    assert max_pairwise_overlap(cb_c3) == pytest.approx(1.0)
    twins = FiniteCodebook(np.array([[1, 0], [1, 0]], dtype=complex))
    assert max_pairwise_overlap(twins) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        max_pairwise_overlap(FiniteCodebook(np.array([[1, 0]], dtype=complex)))


def test_full_cap_iff_contains_selection_codebook():
    gen = np.random.default_rng(29)
    for _ in range(60):
        r = int(gen.integers(2, 5))
        k = int(gen.integers(r, r + 3))
        mat = (gen.uniform(0, 1, (k, r)) * (gen.uniform(0, 1, (k, r)) > 0.5)).astype(complex)
        mat[np.arange(k), gen.integers(0, r, k)] = 1.0  # admissible, no zero vector
        cb = FiniteCodebook(mat)
        cap = diversity_cap(cb)[0]
        full = cap == cb.relay_count
        only_full_set = set(hitting_sets(cb).sets) == {tuple(range(1, r + 1))}
        assert full == only_full_set
        contains_selection = any(
            is_srs(FiniteCodebook(mat[list(rows)]))
            for rows in _r_subsets(k, r)
        )
        assert full == contains_selection


def _r_subsets(k, r):
    from itertools import combinations
    return combinations(range(k), r)


def test_analyze_report_fields(cb_c2):
    report = analyze_codebook(cb_c2)
    data = report.to_json()
    assert data["diversity_cap"] == 1
    assert data["min_witness_set"] == [3]
    assert data["cap_from_cardinality"] == 2
    assert data["is_omrs"] is False
    assert data["is_srs"] is False
    assert data["is_admissible"] is True
    assert data["max_pairwise_overlap"] == pytest.approx(1.0)
    assert [3] in data["index_sets"]
    weights = {tuple(e["set"]): e["value"] for e in data["min_max_weight"]}
    assert weights[(1, 2, 3)] == pytest.approx(1.0)


def test_analyze_singleton_has_no_overlap(cb_c1):
    assert analyze_codebook(cb_c1).max_pairwise_overlap is None


def test_convergence_diagnostic_srs_all_zero():
    rows = convergence_diagnostic(SrsSpec((0.0, 0.0, 0.0)), [10.0, 100.0, 1000.0])
    for row in rows:
        assert row.max_pairwise_overlap == 0.0
        assert row.off_support_max == 0.0


def test_convergence_diagnostic_power_dependent_bound(unit_network2):
    e = np.e
    rows = convergence_diagnostic(PowerDependentSpec(1), [e, e**2, e**4],
                                  unit_network2, channel_samples=8, seed=5)
    offs = [row.off_support_max for row in rows]
    assert offs == pytest.approx([1.0, 0.5, 0.25], rel=1e-12)


def test_convergence_diagnostic_fitted_decay_constant():
    c = 0.7

    def family(p):
        delta = c / (2.0 * np.log(p))
        return FiniteCodebook(np.array([[1.0, delta], [delta, 1.0]], dtype=complex))

    powers = [np.e**k for k in (1, 2, 3, 4, 6)]
    rows = convergence_diagnostic(family, powers)
    fitted = fit_log_decay(powers, [row.max_pairwise_overlap for row in rows])
    assert fitted == pytest.approx(c, rel=0.10)
