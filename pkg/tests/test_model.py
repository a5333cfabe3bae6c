import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spinflow.model import (
    TWO_PI_MHZ,
    DimensionBudgetError,
    DrivePlan,
    LadderSpec,
    PotentialField,
    Site,
    basis_index,
    basis_state,
    build_bose_hubbard,
    build_drive,
    build_interaction,
    build_onsite,
    hardcore_mask,
    ladder_from_dict,
    ladder_to_dict,
    leakage_probability,
    make_ladder,
    occupation_of_site,
    project_to_hardcore,
    sample_disorder,
    tilt_potential,
    total_occupation,
)


def dimer_spec(j_rung=6.6):
    return LadderSpec(L=1, couplings_parallel=np.zeros((0, 2)), couplings_rung=[j_rung])


class TestSite:
    def test_linear_index_bijection(self):
        sites = [Site(j, leg) for j in range(1, 5) for leg in ("up", "down")]
        indices = [s.index for s in sites]
        assert sorted(indices) == list(range(8))

    def test_invalid(self):
        with pytest.raises(ValueError):
            Site(0, "up")
        with pytest.raises(ValueError):
            Site(1, "left")


class TestLadderSpec:
    def test_shapes_enforced(self):
        with pytest.raises(ValueError):
            LadderSpec(L=3, couplings_parallel=np.zeros((1, 2)), couplings_rung=np.zeros(3))
        with pytest.raises(ValueError):
            LadderSpec(L=3, couplings_parallel=np.zeros((2, 2)), couplings_rung=np.zeros(2))

    def test_memory_budget(self):
        with pytest.raises(DimensionBudgetError):
            make_ladder(12)  # 2^24 over the default budget

    def test_qutrit_needs_anharmonicity(self):
        with pytest.raises(ValueError):
            LadderSpec(
                L=1,
                couplings_parallel=np.zeros((0, 2)),
                couplings_rung=[6.6],
                local_dim=3,
            )

    def test_roundtrip_dict(self):
        spec = make_ladder(4, preset="device")
        back = ladder_from_dict(ladder_to_dict(spec))
        assert back.L == spec.L
        np.testing.assert_allclose(back.couplings_parallel, spec.couplings_parallel)
        np.testing.assert_allclose(back.couplings_rung, spec.couplings_rung)
        np.testing.assert_allclose(back.couplings_nnn_parallel, spec.couplings_nnn_parallel)

    def test_presets(self):
        uni = make_ladder(5, preset="uniform")
        assert np.all(uni.couplings_parallel == 7.3)
        assert np.all(uni.couplings_rung == 6.6)
        assert np.all(uni.couplings_diag_down == 0.0)
        dev = make_ladder(5, preset="device")
        assert np.all(dev.couplings_diag_down > 0)
        # reproducible scatter
        again = make_ladder(5, preset="device")
        np.testing.assert_array_equal(dev.couplings_parallel, again.couplings_parallel)


class TestInteraction:
    def test_dimer_eigenvalues(self):
        H = build_interaction(dimer_spec())
        evals = np.linalg.eigvalsh(H.to_dense())
        expected = TWO_PI_MHZ * 6.6
        np.testing.assert_allclose(sorted(evals), [-expected, 0.0, 0.0, expected], atol=1e-14)

    def test_unit_roundtrip(self):
        # a coupling of c MHz appears as 2*pi*1e-3*c in the matrix
        H = build_interaction(dimer_spec(7.25))
        vals = H.matrix.data
        np.testing.assert_allclose(np.abs(vals), TWO_PI_MHZ * 7.25)

    def test_against_dense_enumeration(self):
        # L=2 uniform ladder vs an explicit kron-built 16x16 matrix
        spec = make_ladder(2, preset="uniform")
        H = build_interaction(spec).to_dense()

        sp = np.array([[0, 0], [1, 0]], dtype=complex)  # raises |0> -> |1>
        sm = sp.T.conj()
        eye = np.eye(2, dtype=complex)

        def two_site(a, op_a, b, op_b):
            ops = [eye] * 4
            ops[a] = op_a
            ops[b] = op_b
            out = np.array([[1.0 + 0j]])
            # little-endian: site s is the s-th factor counted from the right
            for op in reversed(ops):
                out = np.kron(out, op)
            return out

        dense = np.zeros((16, 16), dtype=complex)
        bonds = [(0, 2, 7.3), (1, 3, 7.3), (0, 1, 6.6), (2, 3, 6.6)]
        for a, b, j in bonds:
            amp = TWO_PI_MHZ * j
            dense += amp * (two_site(a, sp, b, sm) + two_site(a, sm, b, sp))
        np.testing.assert_allclose(H, dense, atol=1e-15)

    def test_number_conservation(self):
        spec = make_ladder(3, preset="device")
        H = build_interaction(spec)
        total = total_occupation(6, 2)
        rng = np.random.default_rng(0)
        for k in rng.integers(0, spec.hilbert_dim, size=100):
            col = H.matrix.getcol(int(k))
            support = col.nonzero()[0]
            assert np.all(total[support] == total[k])

    def test_hermiticity_sampled(self):
        for preset in ("uniform", "device"):
            H = build_interaction(make_ladder(3, preset=preset))
            assert H.sampled_hermiticity_error() < 1e-14

    def test_exclude_decouples(self):
        spec = make_ladder(2, preset="uniform")
        H = build_interaction(spec, exclude=[0])
        # no matrix element may change the occupation of site 0
        occ0 = occupation_of_site(4, 2, 0)
        coo = H.matrix.tocoo()
        assert np.all(occ0[coo.row] == occ0[coo.col])

    def test_rejects_qutrit(self):
        spec = make_ladder(2, preset="uniform", local_dim=3)
        with pytest.raises(ValueError):
            build_interaction(spec)


class TestDrive:
    def test_zero_drive_is_zero(self):
        spec = make_ladder(2, preset="uniform")
        plan = DrivePlan.uniform(4, 0.0)
        assert build_drive(spec, plan).nnz == 0

    def test_single_site_block(self):
        spec = dimer_spec()
        plan = DrivePlan(np.array([10.4, 0.0]), np.zeros(2), 200.0)
        H = build_drive(spec, plan).to_dense()
        # site 0 raising element between |00> and |01> (indices 0 and 1)
        assert abs(H[1, 0]) == pytest.approx(TWO_PI_MHZ * 10.4 / 2)
        assert H[2, 0] == 0.0

    def test_phase_pi_half_hermitian(self):
        spec = dimer_spec()
        plan = DrivePlan(np.full(2, 8.0), np.full(2, np.pi / 2), 100.0)
        H = build_drive(spec, plan).to_dense()
        np.testing.assert_allclose(H, H.conj().T, atol=1e-15)
        assert np.max(np.abs(H.real)) < 1e-15  # pure imaginary couplings

    def test_mask_restricts(self):
        spec = make_ladder(2, preset="uniform")
        plan = DrivePlan.uniform(4, 10.0)
        H = build_drive(spec, plan, mask=[Site(1, "up")])
        occ1 = occupation_of_site(4, 2, 1)
        coo = H.matrix.tocoo()
        assert np.all(occ1[coo.row] == occ1[coo.col])

    def test_plan_validation(self):
        with pytest.raises(ValueError):
            DrivePlan(np.array([-1.0]), np.array([0.0]), 10.0)
        with pytest.raises(ValueError):
            DrivePlan(np.array([1.0]), np.array([4.0]), 10.0)


class TestOnsite:
    def test_zero_field(self):
        spec = make_ladder(2, preset="uniform")
        H = build_onsite(spec, PotentialField(np.zeros(4)))
        assert H.nnz == 0

    def test_uniform_field_counts_excitations(self):
        spec = make_ladder(2, preset="uniform")
        c = 3.5
        H = build_onsite(spec, PotentialField(np.full(4, c)))
        diag = H.to_dense().diagonal().real
        total = total_occupation(4, 2)
        np.testing.assert_allclose(diag, TWO_PI_MHZ * c * total, atol=1e-15)

    def test_tilt_diagonal_matches_enumeration(self):
        L = 5
        spec = make_ladder(L, preset="uniform")
        field = tilt_potential(80.0, L)
        H = build_onsite(spec, field)
        diag = H.to_dense().diagonal().real
        slope = 2 * 80.0 / (L - 1)
        for k in (0, 7, 255, 1023):
            expected = sum(
                TWO_PI_MHZ * slope * (s // 2 + 1) for s in range(2 * L) if (k >> s) & 1
            )
            assert diag[k] == pytest.approx(expected, abs=1e-12)

    def test_length_mismatch(self):
        spec = make_ladder(2, preset="uniform")
        with pytest.raises(ValueError):
            build_onsite(spec, PotentialField(np.zeros(6)))


class TestDisorder:
    def test_zero_width(self):
        field = sample_disorder(0.0, 8, seed=1)
        assert np.all(field.w == 0.0)

    def test_deterministic(self):
        a = sample_disorder(70.0, 24, seed=123)
        b = sample_disorder(70.0, 24, seed=123)
        np.testing.assert_array_equal(a.w, b.w)
        c = sample_disorder(70.0, 24, seed=124)
        assert np.any(a.w != c.w)

    def test_distribution(self):
        w = 70.0
        draws = np.concatenate(
            [sample_disorder(w, 1000, seed=s).w for s in range(100)]
        )
        assert draws.size == 100_000
        assert np.max(np.abs(draws)) <= w
        sigma = w / np.sqrt(3némy := 3) / np.sqrt(draws.size)
        assert abs(draws.mean()) < 3 * sigma
        counts, _ = np.histogram(draws, bins=20, range=(-w, w))
        expected = draws.size / 20
        chi2 = np.sum((counts - expected) ** 2 / expected)
        assert chi2 < 43.8  # 19 dof, 0.1% tail


class TestTilt:
    def test_zero(self):
        assert np.all(tilt_potential(0.0, 12).w == 0.0)

    def test_slope_value(self):
        field = tilt_potential(80.0, 12)
        assert field.w[0] == pytest.approx(2 * 80.0 / 11)
        assert field.w[-1] == pytest.approx(2 * 80.0 / 11 * 12)

    def test_linear_ramp_both_legs(self):
        field = tilt_potential(1.0, 3)
        np.testing.assert_allclose(field.w, [1, 1, 2, 2, 3, 3])

    def test_needs_two_rungs(self):
        with pytest.raises(ValueError):
            tilt_potential(10.0, 1)


class TestBoseHubbard:
    def test_hardcore_limit_block_structure(self):
        # on the occupations<=1 sector, the qutrit hopping equals the qubit model
        spec3 = make_ladder(2, preset="uniform", local_dim=3)
        spec2 = spec3.with_local_dim(2)
        h3 = build_bose_hubbard(spec3).to_dense()
        h2 = build_interaction(spec2).to_dense()
        mask = hardcore_mask(4)
        idx3 = np.flatnonzero(mask)
        # map each hard-core basis index to its base-3 twin
        k2 = np.arange(16)
        k3 = sum(((k2 >> s) & 1) * 3**s for s in range(4))
        sub = h3[np.ix_(k3, k3)]
        np.testing.assert_allclose(sub, h2, atol=1e-14)
        assert set(k3) == set(idx3)

    def test_single_site_anharmonicity(self):
        spec = LadderSpec(
            L=1,
            couplings_parallel=np.zeros((0, 2)),
            couplings_rung=[0.0],
            local_dim=3,
            anharmonicity=np.full(2, 222.0),
        )
        H = build_bose_hubbard(spec).to_dense()
        diag = np.sort(np.unique(H.diagonal().real))
        np.testing.assert_allclose(
            diag, [-2 * TWO_PI_MHZ * 222.0, -TWO_PI_MHZ * 222.0, 0.0], atol=1e-12
        )

    def test_sqrt2_enhancement(self):
        spec = LadderSpec(
            L=1,
            couplings_parallel=np.zeros((0, 2)),
            couplings_rung=[5.0],
            local_dim=3,
            anharmonicity=np.full(2, 222.0),
        )
        H = build_bose_hubbard(spec).to_dense()
        # |1,1> -> |0,2>: sqrt(1)*sqrt(2)
        src = basis_index([1, 1], 3)
        dst = basis_index([0, 2], 3)
        assert abs(H[dst, src]) == pytest.approx(np.sqrt(2) * TWO_PI_MHZ * 5.0)


class TestLeakage:
    def test_hardcore_state_has_none(self):
        spec = make_ladder(2, preset="uniform", local_dim=3)
        psi = basis_state(4, [1, 0, 1, 0], local_dim=3)
        assert leakage_probability(psi, spec) == 0.0

    def test_doubly_occupied_is_total(self):
        spec = make_ladder(2, preset="uniform", local_dim=3)
        psi = basis_state(4, [2, 0, 0, 0], local_dim=3)
        assert leakage_probability(psi, spec) == 1.0

    def test_projection_norm_complement(self):
        spec = make_ladder(2, preset="uniform", local_dim=3)
        rng = np.random.default_rng(3)
        psi = rng.standard_normal(81) + 1j * rng.standard_normal(81)
        psi /= np.linalg.norm(psi)
        proj = project_to_hardcore(psi, 4)
        leak = leakage_probability(psi, spec)
        assert np.linalg.norm(proj) ** 2 == pytest.approx(1.0 - leak, abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(
    j=st.floats(min_value=0.1, max_value=50.0, allow_nan=False),
    seed=st.integers(min_value=0, max_value=2**32),
)
def test_unit_roundtrip_property(j, seed):
    H = build_interaction(dimer_spec(j))
    np.testing.assert_allclose(np.abs(H.matrix.data), TWO_PI_MHZ * j, rtol=1e-15)


@settings(max_examples=20, deadline=None)
@given(w=st.floats(min_value=0.0, max_value=100.0), seed=st.integers(0, 2**62))
def test_disorder_bounds_property(w, seed):
    field = sample_disorder(w, 12, seed)
    assert np.all(np.abs(field.w) <= w)
