"""One-bit symmetric encryption with shallow decryption circuits.

The key is a seed s for a Goldreich-style local PRG G: each output bit
G(s)_i applies a fixed L-variable predicate to L seed positions chosen
once, publicly, per output index.  Encrypting bit b draws a fresh output
index r and masks: c = (r, G(s)_r xor b).  Decryption recomputes one PRG
bit, so for fixed c it is a function of the seed alone and compiles to a
depth-4 circuit (depth-2 DNF for the predicate, a conjunction layer, an
outer disjunction; negations are free).

A PRF mode replaces G(s)_r by PRF_s(r) with a kappa-bit nonce.  It
round-trips identically but is opaque: there is no small decryption
circuit, and the circuit exporters refuse it.

Security here is desk-scale only: parameters that make the experiments
fast are far below anything cryptographically meaningful.
"""

from __future__ import annotations

import hashlib
import hmac
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .circuit import Circuit, CircuitBuilder, append_minterm_dnf
from .errors import (
    InputShapeError,
    MalformedCiphertextError,
    UnsupportedSchemeError,
)
from .seeds import stream

LOCAL_PRG = "LOCAL_PRG"
PRF = "PRF"

DEFAULT_LOCALITY = 5
MIN_KEY_BITS = 8

LITERAL = "literal"
FOLDED = "folded"


def xor_and_table(locality: int = DEFAULT_LOCALITY) -> np.ndarray:
    """Truth table of x1 ^ ... ^ x_{L-2} ^ (x_{L-1} & x_L), big-endian indexed.

    The classic tri-sum-and predicate at L=5; for smaller L the AND eats
    the last two variables and the XOR the rest.
    """
    if locality < 3:
        raise InputShapeError("xor_and predicate needs locality >= 3")
    idx = np.arange(1 << locality)
    parity = np.zeros_like(idx)
    for t in range(locality - 2):
        parity ^= (idx >> (locality - 1 - t)) & 1
    both = ((idx >> 1) & idx) & 1
    return ((parity ^ both) & 1).astype(np.uint8)


@dataclass(frozen=True, eq=False)
class LocalPrgParams:
    """Public description of the local PRG: who reads which seed bits."""

    kappa: int           # seed length in bits
    ell: int             # output length (stretch)
    locality: int        # L, seed bits per output
    index_sets: np.ndarray  # (ell, L) int32, ordered distinct positions
    table: np.ndarray       # (2^L,) uint8 predicate truth table


def default_stretch(kappa: int) -> int:
    return kappa ** 3


def prg_params_gen(
    master_seed: int,
    kappa: int,
    ell: int | None = None,
    locality: int = DEFAULT_LOCALITY,
    table: np.ndarray | None = None,
) -> LocalPrgParams:
    """Sample public index sets from a deterministic stream.

    Each output's L positions are a uniform ordered draw without
    replacement from the kappa seed positions.
    """
    if kappa < locality:
        raise InputShapeError(f"seed length {kappa} < locality {locality}")
    if ell is None:
        ell = default_stretch(kappa)
    if ell < 1:
        raise InputShapeError("stretch must be >= 1")
    if table is None:
        table = xor_and_table(locality)
    table = np.asarray(table, dtype=np.uint8)
    if table.shape != (1 << locality,):
        raise InputShapeError(
            f"predicate table must have 2^{locality} entries, got {table.shape}"
        )
    rng = stream(master_seed, "prg-index-sets", kappa, ell, locality)
    sets = np.argsort(rng.random((ell, kappa)), axis=1)[:, :locality].astype(np.int32)
    return LocalPrgParams(kappa, ell, locality, sets, table)


def _pow2(locality: int) -> np.ndarray:
    return (1 << np.arange(locality - 1, -1, -1)).astype(np.int64)


def _check_seed(params: LocalPrgParams, seed: np.ndarray) -> np.ndarray:
    arr = np.asarray(seed, dtype=np.uint8)
    if arr.shape != (params.kappa,):
        raise InputShapeError(f"seed must be {params.kappa} bits, got shape {arr.shape}")
    return arr


def prg_expand(params: LocalPrgParams, seed: np.ndarray) -> np.ndarray:
    """All ell output bits of G(seed)."""
    arr = _check_seed(params, seed)
    packed = arr[params.index_sets] @ _pow2(params.locality)
    return params.table[packed]


def prg_bits_at(params: LocalPrgParams, seed: np.ndarray, positions: np.ndarray) -> np.ndarray:
    """G(seed) at selected output positions, without expanding everything."""
    arr = _check_seed(params, seed)
    pos = np.asarray(positions, dtype=np.int64)
    packed = arr[params.index_sets[pos]] @ _pow2(params.locality)
    return params.table[packed]


def prg_bit_circuit(params: LocalPrgParams, i: int) -> Circuit:
    """Depth-2 DNF computing output bit i over the kappa seed wires."""
    if not 0 <= i < params.ell:
        raise InputShapeError(f"output index {i} outside [0, {params.ell})")
    b = CircuitBuilder(params.kappa)
    out = append_minterm_dnf(b, params.table.tolist(), params.index_sets[i].tolist())
    return b.build(out)


class EncCiphertext(NamedTuple):
    """(r, masked): PRG output index or PRF nonce, and the masked bit."""

    r: int
    masked: int


@dataclass(frozen=True, eq=False)
class EncKey:
    scheme: str
    bits: np.ndarray             # (kappa,) uint8 — the PRG seed / PRF key
    prg: LocalPrgParams | None   # public PRG description for LOCAL_PRG

    @property
    def kappa(self) -> int:
        return int(self.bits.shape[0])


def enc_gen(
    kappa: int,
    scheme: str,
    rng: np.random.Generator,
    prg: LocalPrgParams | None = None,
) -> EncKey:
    """Draw a uniform kappa-bit key; kappa >= 8.

    For LOCAL_PRG a public PRG description is attached: pass one to
    share it across keys (as any multi-user scheme should), otherwise a
    fresh one is derived from the rng.
    """
    if kappa < MIN_KEY_BITS:
        raise InputShapeError(f"key length must be >= {MIN_KEY_BITS}, got {kappa}")
    if scheme == LOCAL_PRG:
        if prg is None:
            prg = prg_params_gen(int(rng.integers(1 << 63)), kappa)
        if prg.kappa != kappa:
            raise InputShapeError(
                f"PRG seed length {prg.kappa} != key length {kappa}"
            )
    elif scheme == PRF:
        if prg is not None:
            raise InputShapeError("PRF keys carry no PRG description")
    else:
        raise UnsupportedSchemeError(f"unknown scheme {scheme!r}")
    bits = rng.integers(0, 2, kappa, dtype=np.uint8)
    return EncKey(scheme, bits, prg)


def _key_bytes(key: EncKey) -> bytes:
    return np.packbits(key.bits).tobytes()


def _prf_bit(key_bytes: bytes, r: int, kappa: int) -> int:
    nonce = r.to_bytes((kappa + 7) // 8, "big")
    return hmac.new(key_bytes, nonce, hashlib.sha256).digest()[0] & 1


def _check_bit(bit: int) -> int:
    bit = int(bit)
    if bit not in (0, 1):
        raise InputShapeError(f"plaintext bit must be 0/1, got {bit!r}")
    return bit


def enc_encrypt(key: EncKey, bit: int, rng: np.random.Generator) -> EncCiphertext:
    bit = _check_bit(bit)
    if key.scheme == LOCAL_PRG:
        r = int(rng.integers(key.prg.ell))
        mask = int(prg_bits_at(key.prg, key.bits, np.array([r]))[0])
    else:
        nonce_bits = rng.integers(0, 2, key.kappa, dtype=np.uint8)
        r = int.from_bytes(np.packbits(nonce_bits).tobytes(), "big") >> (
            (8 - key.kappa % 8) % 8
        )
        mask = _prf_bit(_key_bytes(key), r, key.kappa)
    return EncCiphertext(r, mask ^ bit)


def enc_encrypt_many(
    key: EncKey, bits: np.ndarray, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """Encrypt a bit vector under one key; returns (r, masked) arrays."""
    arr = np.asarray(bits, dtype=np.uint8)
    if arr.ndim != 1:
        raise InputShapeError("expected a 1-d bit vector")
    if arr.size and arr.max() > 1:
        raise InputShapeError("plaintext bits must be 0/1")
    k = arr.shape[0]
    if key.scheme == LOCAL_PRG:
        rs = rng.integers(0, key.prg.ell, k, dtype=np.int64)
        masks = prg_bits_at(key.prg, key.bits, rs)
        return rs, masks ^ arr
    kb = _key_bytes(key)
    # object dtype: kappa-bit nonces do not fit a fixed-width integer
    rs = np.empty(k, dtype=object)
    ms = np.empty(k, dtype=np.uint8)
    for j in range(k):
        nonce_bits = rng.integers(0, 2, key.kappa, dtype=np.uint8)
        r = int.from_bytes(np.packbits(nonce_bits).tobytes(), "big") >> (
            (8 - key.kappa % 8) % 8
        )
        rs[j] = r
        ms[j] = _prf_bit(kb, r, key.kappa) ^ arr[j]
    return rs, ms


def _check_index(key: EncKey, r: int) -> int:
    r = int(r)
    if key.scheme == LOCAL_PRG:
        if not 0 <= r < key.prg.ell:
            raise MalformedCiphertextError(
                f"PRG index {r} outside [0, {key.prg.ell})"
            )
    else:
        if not 0 <= r < (1 << key.kappa):
            raise MalformedCiphertextError(
                f"nonce {r} does not fit in {key.kappa} bits"
            )
    return r


def enc_decrypt(key: EncKey, ct: EncCiphertext) -> int:
    r = _check_index(key, ct.r)
    masked = _check_bit(ct.masked)
    if key.scheme == LOCAL_PRG:
        mask = int(prg_bits_at(key.prg, key.bits, np.array([r]))[0])
    else:
        mask = _prf_bit(_key_bytes(key), r, key.kappa)
    return mask ^ masked


def enc_decrypt_many(key: EncKey, rs: np.ndarray, masked: np.ndarray) -> np.ndarray:
    ms = np.asarray(masked, dtype=np.uint8)
    if key.scheme == LOCAL_PRG:
        idx = np.asarray(rs, dtype=np.int64)
        if idx.size and (idx.min() < 0 or idx.max() >= key.prg.ell):
            raise MalformedCiphertextError("PRG index outside stretch range")
        return prg_bits_at(key.prg, key.bits, idx) ^ ms
    kb = _key_bytes(key)
    out = np.empty(ms.shape[0], dtype=np.uint8)
    for j in range(ms.shape[0]):
        out[j] = _prf_bit(kb, _check_index(key, int(rs[j])), key.kappa) ^ ms[j]
    return out


def append_dec_component(
    b: CircuitBuilder,
    ct: EncCiphertext,
    prg: LocalPrgParams,
    mode: str = LITERAL,
) -> int:
    """Append the decryption function of a fixed ciphertext onto seed wires 0..kappa-1.

    literal: one conjunction per PRG output index — a CONST indicator
    [i == r] ANDed with (G_i(s) xor masked), all joined by one OR.  The
    masked=1 branch keeps the xor as a free NOT on top of the DNF.
    Depth <= 4 by construction.

    folded: the minterm DNF of G_r(s) xor masked directly (what
    constant-folding the literal build yields, depth <= 2).  This is the
    only build that stays small at real stretch values.
    """
    r = int(ct.r)
    if not 0 <= r < prg.ell:
        raise MalformedCiphertextError(f"PRG index {r} outside [0, {prg.ell})")
    masked = _check_bit(ct.masked)
    table = prg.table
    if mode == FOLDED:
        eff = (table ^ masked).tolist()
        return append_minterm_dnf(b, eff, prg.index_sets[r].tolist())
    if mode != LITERAL:
        raise InputShapeError(f"unknown circuit mode {mode!r}")
    tbl = table.tolist()
    terms = []
    for i in range(prg.ell):
        ind = b.const(1 if i == r else 0)
        g = append_minterm_dnf(b, tbl, prg.index_sets[i].tolist())
        if masked:
            g = b.not_(g)
        terms.append(b.and_((ind, g)))
    return b.or_(terms)


def enc_dec_circuit(
    ct: EncCiphertext, prg: LocalPrgParams | None, mode: str = LITERAL
) -> Circuit:
    """Decryption circuit Dec_ct over the kappa seed wires (LOCAL_PRG only)."""
    if prg is None:
        raise UnsupportedSchemeError(
            "PRF decryption has no small circuit; only LOCAL_PRG keys export one"
        )
    b = CircuitBuilder(prg.kappa)
    return b.build(append_dec_component(b, ct, prg, mode))


def collision_bound(ell: int, k: int) -> float:
    """Birthday bound k^2/ell on reusing a PRG output index across k encryptions.

    Reported (not enforced): the one-time-pad argument degrades by this
    plus the PRG distinguishing advantage.
    """
    return (k * k) / float(ell)
