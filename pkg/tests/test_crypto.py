import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ttpa.circuit import (
    AND,
    CircuitMetrics,
    circuit_metrics,
    constant_fold,
    eval_on_rows,
)
from ttpa.crypto import (
    FOLDED,
    LITERAL,
    LOCAL_PRG,
    PRF,
    EncCiphertext,
    EncKey,
    append_dec_component,
    collision_bound,
    default_stretch,
    enc_dec_circuit,
    enc_decrypt,
    enc_decrypt_many,
    enc_encrypt,
    enc_encrypt_many,
    enc_gen,
    prg_bit_circuit,
    prg_bits_at,
    prg_expand,
    prg_params_gen,
    xor_and_table,
)
from ttpa.circuit import CircuitBuilder
from ttpa.errors import (
    InputShapeError,
    MalformedCiphertextError,
    UnsupportedSchemeError,
)


def all_rows(width: int) -> np.ndarray:
    n = 1 << width
    rows = np.zeros((n, width), dtype=np.uint8)
    for j in range(width):
        rows[:, j] = (np.arange(n) >> (width - 1 - j)) & 1
    return rows


def bits_of(value: int, width: int) -> np.ndarray:
    return np.array([(value >> (width - 1 - t)) & 1 for t in range(width)], dtype=np.uint8)


class TestPredicateTable:
    def test_known_assignment(self):
        # x1..x5 = 1,0,1,1,0: parity 1^0^1 = 0, last-two AND 1&0 = 0
        table = xor_and_table(5)
        assert table[0b10110] == 0

    def test_small_locality_assignments(self):
        # L=3 is x1 ^ (x2 & x3)
        table = xor_and_table(3)
        assert table[0b111] == 0
        assert table[0b011] == 1
        assert table[0b100] == 1

    @pytest.mark.parametrize("locality", [3, 4, 5, 6, 7])
    def test_balanced(self, locality):
        # the parity part makes the predicate balanced in x1
        table = xor_and_table(locality)
        assert int(table.sum()) == 1 << (locality - 1)

    def test_pure_python_recompute(self):
        table = xor_and_table(5)
        for idx in range(32):
            x = [(idx >> (4 - t)) & 1 for t in range(5)]
            assert table[idx] == (x[0] ^ x[1] ^ x[2] ^ (x[3] & x[4]))

    def test_locality_too_small(self):
        with pytest.raises(InputShapeError):
            xor_and_table(2)


class TestPrgParams:
    def test_index_set_shape_and_range(self):
        params = prg_params_gen(1, 8, ell=4)
        assert params.index_sets.shape == (4, 5)
        assert params.index_sets.min() >= 0
        assert params.index_sets.max() < 8
        for row in params.index_sets:
            assert len(set(row.tolist())) == 5

    def test_default_stretch_is_cubic(self):
        assert default_stretch(64) == 262144
        assert prg_params_gen(0, 8).ell == 512

    def test_deterministic_in_master_seed(self):
        a = prg_params_gen(7, 16, ell=32)
        b = prg_params_gen(7, 16, ell=32)
        c = prg_params_gen(8, 16, ell=32)
        assert np.array_equal(a.index_sets, b.index_sets)
        assert not np.array_equal(a.index_sets, c.index_sets)

    def test_seed_shorter_than_locality(self):
        with pytest.raises(InputShapeError):
            prg_params_gen(0, 4)

    def test_bad_stretch_and_table(self):
        with pytest.raises(InputShapeError):
            prg_params_gen(0, 8, ell=0)
        with pytest.raises(InputShapeError):
            prg_params_gen(0, 8, ell=4, table=np.zeros(7, dtype=np.uint8))

    @given(st.integers(0, 2**32), st.integers(5, 12), st.integers(1, 40))
    def test_index_sets_always_distinct(self, seed, kappa, ell):
        params = prg_params_gen(seed, kappa, ell=ell)
        for row in params.index_sets:
            assert len(set(row.tolist())) == params.locality


class TestPrgExpand:
    def test_zero_seed_zero_output(self):
        params = prg_params_gen(3, 10, ell=64)
        out = prg_expand(params, np.zeros(10, dtype=np.uint8))
        assert out.shape == (64,)
        assert not out.any()

    def test_matches_scalar_recompute(self):
        params = prg_params_gen(5, 12, ell=50)
        rng = np.random.default_rng(11)
        seed = rng.integers(0, 2, 12, dtype=np.uint8)
        out = prg_expand(params, seed)
        for i in range(50):
            idx = 0
            for p in params.index_sets[i]:
                idx = (idx << 1) | int(seed[p])
            assert out[i] == params.table[idx]

    def test_bits_at_agrees_with_expand(self):
        params = prg_params_gen(5, 12, ell=50)
        seed = np.random.default_rng(12).integers(0, 2, 12, dtype=np.uint8)
        pos = np.array([0, 17, 17, 49, 3])
        assert np.array_equal(prg_bits_at(params, seed, pos), prg_expand(params, seed)[pos])

    def test_seed_shape_checked(self):
        params = prg_params_gen(0, 8, ell=4)
        with pytest.raises(InputShapeError):
            prg_expand(params, np.zeros(9, dtype=np.uint8))


class TestPrgBitCircuit:
    def test_depth_two_and_exhaustive_agreement(self):
        params = prg_params_gen(9, 6, ell=10)
        rows = all_rows(6)
        expanded = np.stack([prg_expand(params, r) for r in rows])
        for i in range(10):
            circ = prg_bit_circuit(params, i)
            assert circ.input_width == 6
            assert circuit_metrics(circ).depth <= 2
            assert np.array_equal(eval_on_rows(circ, rows), expanded[:, i])

    def test_index_out_of_range(self):
        params = prg_params_gen(0, 8, ell=4)
        with pytest.raises(InputShapeError):
            prg_bit_circuit(params, 4)

    def test_xor_predicate_two_term_dnf(self):
        params = prg_params_gen(2, 2, ell=4, locality=2,
                                table=np.array([0, 1, 1, 0], dtype=np.uint8))
        circ = prg_bit_circuit(params, 0)
        assert sum(1 for g in circ.gates if g.op == AND) == 2
        assert circuit_metrics(circ) == CircuitMetrics(5, 2)
        rows = all_rows(2)
        assert np.array_equal(eval_on_rows(circ, rows), rows[:, 0] ^ rows[:, 1])


class TestEncGen:
    def test_local_prg_attaches_public_params(self):
        rng = np.random.default_rng(0)
        key = enc_gen(16, LOCAL_PRG, rng)
        assert key.kappa == 16
        assert key.prg is not None and key.prg.kappa == 16
        assert key.prg.ell == default_stretch(16)

    def test_shared_params_reused(self):
        params = prg_params_gen(4, 16)
        rng = np.random.default_rng(0)
        key = enc_gen(16, LOCAL_PRG, rng, prg=params)
        assert key.prg is params

    def test_validation(self):
        rng = np.random.default_rng(0)
        with pytest.raises(InputShapeError):
            enc_gen(7, LOCAL_PRG, rng)
        with pytest.raises(UnsupportedSchemeError):
            enc_gen(16, "OTP", rng)
        with pytest.raises(InputShapeError):
            enc_gen(16, PRF, rng, prg=prg_params_gen(0, 16))
        with pytest.raises(InputShapeError):
            enc_gen(32, LOCAL_PRG, rng, prg=prg_params_gen(0, 16))

    def test_keys_distinct_across_draws(self):
        rng = np.random.default_rng(123)
        params = prg_params_gen(0, 64, ell=64)
        seen = {
            tuple(enc_gen(64, LOCAL_PRG, rng, prg=params).bits.tolist())
            for _ in range(1000)
        }
        assert len(seen) == 1000

    def test_deterministic_in_rng(self):
        a = enc_gen(16, PRF, np.random.default_rng(5))
        b = enc_gen(16, PRF, np.random.default_rng(5))
        assert np.array_equal(a.bits, b.bits)


class _StubIndexRng:
    """Stands in for a Generator when the test pins the drawn PRG index."""

    def __init__(self, value: int):
        self.value = value

    def integers(self, *args, **kwargs):
        return self.value


class TestEncRoundtrip:
    @pytest.mark.parametrize("scheme", [LOCAL_PRG, PRF])
    @pytest.mark.parametrize("bit", [0, 1])
    def test_single_roundtrip(self, scheme, bit):
        rng = np.random.default_rng(42)
        key = enc_gen(16, scheme, rng)
        for _ in range(20):
            assert enc_decrypt(key, enc_encrypt(key, bit, rng)) == bit

    def test_pinned_index_instance(self):
        params = prg_params_gen(0, 8, ell=8)
        seed = next(
            bits_of(v, 8)
            for v in range(256)
            if prg_expand(params, bits_of(v, 8))[3] == 1
        )
        key = EncKey(LOCAL_PRG, seed, params)
        ct = enc_encrypt(key, 0, _StubIndexRng(3))
        assert ct == EncCiphertext(3, 1)
        assert enc_decrypt(key, ct) == 0
        ct1 = enc_encrypt(key, 1, _StubIndexRng(3))
        assert ct1 == EncCiphertext(3, 0)
        assert enc_decrypt(key, ct1) == 1

    def test_masked_bit_roughly_balanced(self):
        rng = np.random.default_rng(77)
        key = enc_gen(16, LOCAL_PRG, rng)
        _, ms = enc_encrypt_many(key, np.zeros(4000, dtype=np.uint8), rng)
        assert abs(float(ms.mean()) - 0.5) < 0.1

    def test_plaintext_validation(self):
        rng = np.random.default_rng(0)
        key = enc_gen(16, LOCAL_PRG, rng)
        with pytest.raises(InputShapeError):
            enc_encrypt(key, 2, rng)
        with pytest.raises(InputShapeError):
            enc_decrypt(key, EncCiphertext(0, 2))

    def test_index_out_of_range_rejected(self):
        rng = np.random.default_rng(0)
        key = enc_gen(16, LOCAL_PRG, rng)
        ell = key.prg.ell
        for bad in (ell, -1):
            with pytest.raises(MalformedCiphertextError):
                enc_decrypt(key, EncCiphertext(bad, 0))
        pkey = enc_gen(16, PRF, rng)
        with pytest.raises(MalformedCiphertextError):
            enc_decrypt(pkey, EncCiphertext(1 << 16, 0))

    def test_batch_roundtrip_local_prg(self):
        rng = np.random.default_rng(8)
        key = enc_gen(16, LOCAL_PRG, rng)
        bits = rng.integers(0, 2, 200, dtype=np.uint8)
        rs, ms = enc_encrypt_many(key, bits, rng)
        assert np.array_equal(enc_decrypt_many(key, rs, ms), bits)
        singles = [enc_decrypt(key, EncCiphertext(int(r), int(m))) for r, m in zip(rs, ms)]
        assert np.array_equal(np.array(singles), bits)

    def test_batch_roundtrip_prf_wide_nonces(self):
        # regression: 64-bit nonces overflowed a fixed-width index array
        rng = np.random.default_rng(8)
        key = enc_gen(64, PRF, rng)
        bits = rng.integers(0, 2, 100, dtype=np.uint8)
        rs, ms = enc_encrypt_many(key, bits, rng)
        assert max(int(r).bit_length() for r in rs) == 64
        assert np.array_equal(enc_decrypt_many(key, rs, ms), bits)

    def test_batch_input_validation(self):
        rng = np.random.default_rng(0)
        key = enc_gen(16, LOCAL_PRG, rng)
        with pytest.raises(InputShapeError):
            enc_encrypt_many(key, np.zeros((2, 2), dtype=np.uint8), rng)
        with pytest.raises(InputShapeError):
            enc_encrypt_many(key, np.array([0, 3], dtype=np.uint8), rng)
        with pytest.raises(MalformedCiphertextError):
            enc_decrypt_many(key, np.array([key.prg.ell]), np.array([0], dtype=np.uint8))

    @given(st.lists(st.integers(0, 1), min_size=0, max_size=64), st.integers(0, 2**32))
    @settings(max_examples=25)
    def test_batch_roundtrip_property(self, bits, seed):
        rng = np.random.default_rng(seed)
        key = enc_gen(8, LOCAL_PRG, rng, prg=prg_params_gen(1, 8, ell=32))
        arr = np.array(bits, dtype=np.uint8)
        rs, ms = enc_encrypt_many(key, arr, rng)
        assert np.array_equal(enc_decrypt_many(key, rs, ms), arr)


class TestDecCircuit:
    def _params(self):
        return prg_params_gen(6, 10, ell=6)

    def test_prf_has_no_circuit(self):
        with pytest.raises(UnsupportedSchemeError):
            enc_dec_circuit(EncCiphertext(0, 0), None)

    @pytest.mark.parametrize("masked", [0, 1])
    @pytest.mark.parametrize("r", [0, 3, 5])
    def test_exhaustive_agreement_both_modes(self, r, masked):
        params = self._params()
        ct = EncCiphertext(r, masked)
        rows = all_rows(10)
        expected = np.array(
            [enc_decrypt(EncKey(LOCAL_PRG, row, params), ct) for row in rows],
            dtype=np.uint8,
        )
        lit = enc_dec_circuit(ct, params, LITERAL)
        fol = enc_dec_circuit(ct, params, FOLDED)
        assert lit.input_width == 10 and fol.input_width == 10
        assert np.array_equal(eval_on_rows(lit, rows), expected)
        assert np.array_equal(eval_on_rows(fol, rows), expected)

    def test_depth_bounds(self):
        params = self._params()
        for masked in (0, 1):
            ct = EncCiphertext(2, masked)
            assert circuit_metrics(enc_dec_circuit(ct, params, LITERAL)).depth == 4
            assert circuit_metrics(enc_dec_circuit(ct, params, FOLDED)).depth == 2

    def test_folding_the_literal_build_matches_folded_mode(self):
        params = self._params()
        ct = EncCiphertext(4, 1)
        rows = all_rows(10)
        folded_lit = constant_fold(enc_dec_circuit(ct, params, LITERAL))
        assert circuit_metrics(folded_lit).depth <= 2
        assert np.array_equal(
            eval_on_rows(folded_lit, rows),
            eval_on_rows(enc_dec_circuit(ct, params, FOLDED), rows),
        )

    def test_folded_stays_small_at_full_stretch(self):
        params = prg_params_gen(13, 16)
        assert params.ell == 4096
        m = circuit_metrics(enc_dec_circuit(EncCiphertext(4095, 1), params, FOLDED))
        assert m.depth <= 2
        assert m.size <= 40

    def test_mode_and_index_validation(self):
        params = self._params()
        b = CircuitBuilder(10)
        with pytest.raises(InputShapeError):
            append_dec_component(b, EncCiphertext(0, 0), params, mode="nope")
        with pytest.raises(MalformedCiphertextError):
            enc_dec_circuit(EncCiphertext(6, 0), params)


class TestCollisionBound:
    def test_exact_values(self):
        assert collision_bound(262144, 50) == 0.0095367431640625
        assert collision_bound(4, 2) == 1.0
