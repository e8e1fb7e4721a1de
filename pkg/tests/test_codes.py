import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from scldpc.codes import (
    AlistError,
    BpDecoder,
    awgn_llrs,
    bec_llrs,
    bp_decode,
    lift,
    read_alist,
    run_monte_carlo,
    write_alist,
)
from scldpc.protograph import BaseMatrix, regular_ensemble, tarja_ensemble, terminate
from scldpc.thresholds import Awgn, Bec

from oracles import peel

B33 = BaseMatrix(np.array([[3, 3]]))
TARJA_B = BaseMatrix(
    np.array([[1, 2, 0, 0, 0], [0, 3, 1, 1, 1], [0, 1, 2, 1, 2]]),
    punctured=frozenset({2}),
)


class TestLift:
    def test_single_entry_is_permutation(self):
        H = lift(BaseMatrix(np.array([[1]])), 4, seed=0).H.toarray()
        assert (H.sum(axis=0) == 1).all() and (H.sum(axis=1) == 1).all()

    def test_degree_preservation_36(self):
        code = lift(B33, 100, seed=1)
        assert (np.asarray(code.H.sum(axis=0)).ravel() == 3).all()
        assert (np.asarray(code.H.sum(axis=1)).ravel() == 6).all()
        assert (code.H.data == 1).all()

    def test_tarja_block_degrees_and_multi_edges(self):
        code = lift(TARJA_B, 8, seed=5)
        cd = np.asarray(code.H.sum(axis=0)).ravel()
        rd = np.asarray(code.H.sum(axis=1)).ravel()
        assert (cd == np.repeat([1, 6, 3, 2, 3], 8)).all()
        assert (rd == np.repeat([3, 6, 6], 8)).all()
        # the double edge at base entry (0,1) lifts to a 0/1 block with
        # row and column sums 2
        block = code.H[0:8, 8:16].toarray()
        assert set(np.unique(block)) <= {0, 1}
        assert (block.sum(axis=0) == 2).all() and (block.sum(axis=1) == 2).all()
        assert code.puncture_mask[16:24].all() and not code.puncture_mask[:16].any()

    def test_deterministic(self):
        a = lift(B33, 64, seed=9).H
        b = lift(B33, 64, seed=9).H
        assert (a != b).nnz == 0
        c = lift(B33, 64, seed=10).H
        assert (a != c).nnz != 0

    def test_small_N_rejected(self):
        with pytest.raises(ValueError):
            lift(TARJA_B, 1, seed=0)

    @settings(max_examples=15, deadline=None)
    @given(J=st.integers(2, 4), L=st.integers(1, 4), N=st.integers(4, 24), seed=st.integers(0, 999))
    def test_degrees_preserved_generally(self, J, L, N, seed):
        base = terminate(regular_ensemble(J, L))
        code = lift(base, N, seed=seed)
        assert (
            np.asarray(code.H.sum(axis=0)).ravel()
            == np.repeat(base.entries.sum(axis=0), N)
        ).all()
        assert (
            np.asarray(code.H.sum(axis=1)).ravel()
            == np.repeat(base.entries.sum(axis=1), N)
        ).all()


class TestAlist:
    def test_identity_exact_text(self):
        assert write_alist(np.eye(2, dtype=int)) == "2 2\n1 1\n1 1\n1 1\n1\n2\n1\n2\n"

    @pytest.mark.parametrize("N", [8, 50, 300])
    def test_roundtrip(self, N):
        H = lift(B33, N, seed=7).H
        assert (read_alist(write_alist(H)) != H).nnz == 0

    def test_truncated_rejected(self):
        text = write_alist(lift(B33, 8, seed=1).H)
        lines = text.splitlines()
        with pytest.raises(AlistError, match="truncated|missing"):
            read_alist("\n".join(lines[: len(lines) // 2]))

    def test_index_out_of_range_rejected(self):
        with pytest.raises(AlistError, match="out of range"):
            read_alist("2 2\n1 1\n1 1\n1 1\n1\n3\n1\n2\n")

    def test_degree_mismatch_rejected(self):
        with pytest.raises(AlistError, match="degree mismatch"):
            read_alist("2 2\n1 1\n1 2\n1 1\n1\n2\n1\n2\n")

    def test_sections_must_agree(self):
        with pytest.raises(AlistError, match="disagree"):
            read_alist("2 2\n1 1\n1 1\n1 1\n1\n2\n2\n1\n")


class TestChannels:
    def test_punctured_positions_zero(self):
        mask = np.array([False, True, False, True])
        llr = awgn_llrs(np.zeros(4, dtype=int), 0.5, mask, seed=3)
        assert llr[1] == 0.0 and llr[3] == 0.0 and llr[0] != 0.0

    def test_noiseless_limit(self):
        llr = awgn_llrs(np.zeros(100, dtype=int), 1e-3, seed=0)
        assert (llr > 1e5).all()

    def test_llr_mean(self):
        llr = awgn_llrs(np.zeros(10**6, dtype=int), 1.0, seed=0)
        assert abs(llr.mean() - 2.0) < 0.01

    def test_bec_llrs(self):
        llr = bec_llrs(np.zeros(10**5, dtype=int), 0.3, seed=1)
        frac = (llr == 0.0).mean()
        assert abs(frac - 0.3) < 0.01
        assert set(np.unique(llr)) <= {0.0, 50.0}

    def test_sigma_validated(self):
        with pytest.raises(ValueError):
            awgn_llrs(np.zeros(4, dtype=int), 0.0)


class TestBpDecode:
    def test_noiseless_converges_at_iteration_zero(self):
        code = lift(B33, 32, seed=2)
        bits, iters, conv = bp_decode(code.H, np.full(64, 50.0))
        assert conv and iters == 0 and not bits.any()

    def test_single_flip_sweep_N16(self):
        code = lift(B33, 16, seed=11)
        dec = BpDecoder(code.H)
        for pos in range(32):
            llr = np.full(32, 8.0)
            llr[pos] = -8.0
            bits, iters, conv = dec.decode(llr, max_iter=10)
            assert conv and iters <= 5 and not bits.any(), f"flip at {pos}"

    def test_dimension_mismatch(self):
        code = lift(B33, 16, seed=0)
        with pytest.raises(ValueError):
            bp_decode(code.H, np.zeros(10))

    def test_sign_symmetry_first_iteration(self):
        code = lift(B33, 24, seed=4)
        dec = BpDecoder(code.H)
        rng = np.random.default_rng(8)
        llr = awgn_llrs(np.zeros(48, dtype=int), 1.2, rng=rng)
        bits_pos, _, _ = dec.decode(llr, max_iter=1)
        bits_neg, _, _ = dec.decode(-llr, max_iter=1)
        assert (bits_pos ^ bits_neg).all()

    def test_bec_patterns_match_peeling_oracle(self):
        # random nonzero codewords: a resolvable pattern must decode to the
        # transmitted word, an unresolvable one must not
        code = lift(B33, 64, seed=21)
        dec = BpDecoder(code.H)
        from oracles import random_codeword

        successes = failures = 0
        for trial in range(30):
            rng = np.random.default_rng(trial)
            cw = random_codeword(code.H, rng).astype(bool)
            assert not (code.H @ cw % 2).any()
            erased = rng.random(128) < 0.35
            llr = np.where(erased, 0.0, 50.0 * (1.0 - 2.0 * cw))
            bits, _, conv = dec.decode(llr, max_iter=200)
            residual = peel(code.H, erased)
            # positions peeling resolves decode to the transmitted value;
            # residual stopping-set positions keep the all-zero default
            assert (bits[~residual] == cw[~residual]).all(), f"trial {trial}"
            assert not bits[residual].any(), f"trial {trial}"
            if not residual.any():
                assert conv and (bits == cw).all(), f"trial {trial}"
                successes += 1
            else:
                failures += 1
        assert successes >= 10 and failures >= 1


class TestMonteCarlo:
    def test_quiet_channel_no_errors(self):
        code = lift(B33, 16, seed=1)
        st = run_monte_carlo(code, Awgn(0.05), max_frames=100, min_frame_errors=10)
        assert st.frames == 100 and st.ber == 0.0 and st.fer == 0.0
        assert st.avg_iterations == 0.0

    def test_bitwise_replay(self):
        code = lift(B33, 24, seed=3)
        kw = dict(max_frames=80, min_frame_errors=30, max_iter=30, master_seed=17)
        assert run_monte_carlo(code, Awgn(1.1), **kw) == run_monte_carlo(
            code, Awgn(1.1), **kw
        )

    def test_stops_on_frame_errors(self):
        code = lift(B33, 24, seed=3)
        st = run_monte_carlo(
            code, Awgn(2.0), max_frames=10**6, min_frame_errors=5, max_iter=10
        )
        assert st.frame_errors >= 5 and st.frames < 10**4

    def test_punctured_bits_not_counted(self):
        base = terminate(tarja_ensemble(3))
        code = lift(base, 8, seed=6)
        st = run_monte_carlo(
            code, Awgn(2.5), max_frames=20, min_frame_errors=5, max_iter=5
        )
        assert st.ber <= 1.0
        n_tx = code.n_transmitted
        assert n_tx == code.n - 3 * 8
        assert st.ber == st.bit_errors / (st.frames * n_tx)

    def test_bec_channel(self):
        code = lift(B33, 32, seed=2)
        st = run_monte_carlo(
            code, Bec(0.2), max_frames=50, min_frame_errors=10, max_iter=50
        )
        assert st.frames == 50 and st.fer <= 0.2
        assert st.ebno_db is None
