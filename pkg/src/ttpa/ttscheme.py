"""n-user traitor tracing from one-bit encryption plus fingerprinting.

Each user key is a kappa-bit row: a kappa/2-bit encryption key, the
user's index in big-endian (ceil(log2 n) bits), and zero padding.
Broadcast encryption encrypts the same bit under every user key;
decryption picks the component named by the row's index bits.  Tracing
encrypts a fingerprinting codeword column-wise (user u's component in
ciphertext j encrypts W[u, j]), feeds all columns to the pirate in one
shot, and hands the answered word to the code's tracer.  A linear-scan
tracer using the mixed ciphertexts (first i users see 1) is also
provided.

For LOCAL_PRG keys every tracing ciphertext has a decryption circuit of
depth <= 6: the component circuits (depth <= 4) under an index-indicator
conjunction and an outer disjunction.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .circuit import Circuit, CircuitBuilder
from .crypto import (
    FOLDED,
    LITERAL,
    LOCAL_PRG,
    PRF,
    EncCiphertext,
    EncKey,
    LocalPrgParams,
    append_dec_component,
    enc_decrypt_many,
    enc_encrypt_many,
    enc_gen,
    prg_expand,
    prg_params_gen,
)
from .errors import (
    FileFormatError,
    InputShapeError,
    MalformedCiphertextError,
    OneShotViolationError,
    UnsupportedSchemeError,
)
from .fpcode import Codebook, fp_gen, fp_trace


def index_width(n: int) -> int:
    """Bits reserved for the user index: ceil(log2 n), 0 for a single user."""
    return (n - 1).bit_length() if n > 1 else 0


@dataclass(frozen=True, eq=False)
class TTParams:
    """Public scheme description shared by keys, ciphertexts, and circuits."""

    kappa: int
    n: int
    scheme: str
    prg: LocalPrgParams | None

    @property
    def enc_bits(self) -> int:
        return self.kappa // 2

    @property
    def index_bits(self) -> int:
        return index_width(self.n)


@dataclass(frozen=True, eq=False)
class TTKeySet:
    params: TTParams
    rows: np.ndarray  # (n, kappa) uint8 user key rows

    def key(self, user: int) -> EncKey:
        """The user's component encryption key."""
        ke = self.params.enc_bits
        return EncKey(self.params.scheme, self.rows[user, :ke], self.params.prg)


@dataclass(frozen=True, eq=False)
class TTCiphertext:
    """One component ciphertext per user, stored columnar for bulk work."""

    rs: np.ndarray      # (n,) int64
    masked: np.ndarray  # (n,) uint8

    @property
    def n(self) -> int:
        return int(self.rs.shape[0])

    @property
    def components(self) -> tuple[EncCiphertext, ...]:
        return tuple(
            EncCiphertext(int(r), int(m)) for r, m in zip(self.rs, self.masked)
        )


def tt_gen(
    kappa: int,
    n: int,
    scheme: str,
    rng: np.random.Generator,
    prg: LocalPrgParams | None = None,
) -> TTKeySet:
    """Fresh user keys; kappa even, n <= 2^(kappa/2).

    The PRG description is public and shared across users; pass one to
    pin it, otherwise it is derived from the rng.
    """
    if kappa % 2:
        raise InputShapeError(f"kappa must be even, got {kappa}")
    if kappa < 16:
        raise InputShapeError(f"kappa must be >= 16 (component keys need >= 8 bits)")
    if n < 1:
        raise InputShapeError(f"need at least one user, got {n}")
    if n > (1 << (kappa // 2)):
        raise InputShapeError(f"n={n} exceeds 2^(kappa/2) with kappa={kappa}")
    ke = kappa // 2
    if scheme == LOCAL_PRG:
        if prg is None:
            prg = prg_params_gen(int(rng.integers(1 << 63)), ke)
        if prg.kappa != ke:
            raise InputShapeError(f"PRG seed length {prg.kappa} != kappa/2 = {ke}")
    elif scheme == PRF:
        if prg is not None:
            raise InputShapeError("PRF keys carry no PRG description")
    else:
        raise UnsupportedSchemeError(f"unknown scheme {scheme!r}")
    params = TTParams(kappa, n, scheme, prg)
    iw = params.index_bits
    rows = np.zeros((n, kappa), dtype=np.uint8)
    rows[:, :ke] = rng.integers(0, 2, (n, ke), dtype=np.uint8)
    for t in range(iw):
        rows[:, ke + t] = (np.arange(n) >> (iw - 1 - t)) & 1
    return TTKeySet(params, rows)


def decode_key_row(params: TTParams, row: np.ndarray) -> tuple[np.ndarray, int]:
    """Split a key row into (component key bits, decoded user index)."""
    arr = np.asarray(row, dtype=np.uint8)
    if arr.shape != (params.kappa,):
        raise InputShapeError(
            f"key row must be {params.kappa} bits, got shape {arr.shape}"
        )
    ke, iw = params.enc_bits, params.index_bits
    idx = 0
    for t in range(iw):
        idx = (idx << 1) | int(arr[ke + t])
    return arr[:ke], idx


def tr_enc(ks: TTKeySet, words: np.ndarray, rng: np.random.Generator) -> list[TTCiphertext]:
    """Tracing ciphertexts: column j carries W[u, j] to user u, for every j."""
    w = np.asarray(words, dtype=np.uint8)
    if w.ndim != 2 or w.shape[0] != ks.params.n:
        raise InputShapeError(
            f"word matrix must be (n={ks.params.n}, k), got shape {w.shape}"
        )
    k = w.shape[1]
    n = ks.params.n
    # PRF nonces are kappa/2-bit ints; int64 would overflow past 63 bits
    rdtype = np.int64 if ks.params.scheme == LOCAL_PRG else object
    rs = np.empty((k, n), dtype=rdtype)
    ms = np.empty((k, n), dtype=np.uint8)
    for u in range(n):
        ru, mu = enc_encrypt_many(ks.key(u), w[u], rng)
        rs[:, u] = ru
        ms[:, u] = mu
    return [TTCiphertext(rs[j], ms[j]) for j in range(k)]


def tt_enc(ks: TTKeySet, bit: int, rng: np.random.Generator) -> TTCiphertext:
    """Broadcast encryption: every user's component carries the same bit."""
    bit = int(bit)
    if bit not in (0, 1):
        raise InputShapeError(f"plaintext bit must be 0/1, got {bit!r}")
    col = np.full((ks.params.n, 1), bit, dtype=np.uint8)
    return tr_enc(ks, col, rng)[0]


def tr_enc_index(ks: TTKeySet, i: int, rng: np.random.Generator) -> TTCiphertext:
    """Mixed ciphertext at level i: users 0..i-1 decrypt 1, the rest 0."""
    n = ks.params.n
    if not 0 <= i <= n:
        raise InputShapeError(f"level must be in [0, {n}], got {i}")
    col = (np.arange(n) < i).astype(np.uint8)[:, None]
    return tr_enc(ks, col, rng)[0]


def tt_dec(params: TTParams, row: np.ndarray, ct: TTCiphertext) -> int:
    """Decrypt with any single user key row (its own component)."""
    key_bits, idx = decode_key_row(params, row)
    if idx >= params.n:
        raise InputShapeError(
            f"decoded index {idx} outside the {params.n}-user key space"
        )
    if ct.n != params.n:
        raise MalformedCiphertextError(
            f"ciphertext has {ct.n} components, scheme has {params.n} users"
        )
    key = EncKey(params.scheme, key_bits, params.prg)
    return int(
        enc_decrypt_many(key, ct.rs[idx : idx + 1], ct.masked[idx : idx + 1])[0]
    )


def tt_dec_circuit(ct: TTCiphertext, params: TTParams, mode: str = FOLDED) -> Circuit:
    """Decryption circuit of a fixed ciphertext over the kappa key-row wires.

    Per user: an indicator conjunction over the index wires joined with
    that user's component decryption circuit; one outer OR.  Built from
    the ciphertext and public parameters only — no key material.  Depth
    <= 6 in literal mode, <= 4 folded.
    """
    if params.scheme != LOCAL_PRG:
        raise UnsupportedSchemeError(
            "decryption circuits exist only for LOCAL_PRG keys"
        )
    if ct.n != params.n:
        raise MalformedCiphertextError(
            f"ciphertext has {ct.n} components, scheme has {params.n} users"
        )
    ke, iw, n = params.enc_bits, params.index_bits, params.n
    b = CircuitBuilder(params.kappa)
    user_terms = []
    for u in range(n):
        if iw:
            ind = [
                b.literal(ke + t, bool((u >> (iw - 1 - t)) & 1)) for t in range(iw)
            ]
        else:
            ind = [b.const(1)]
        comp = append_dec_component(
            b, EncCiphertext(int(ct.rs[u]), int(ct.masked[u])), params.prg, mode
        )
        user_terms.append(b.and_((*ind, comp)))
    return b.build(b.or_(user_terms))


class PirateOracle:
    """Single-use decoder: one batch of ciphertexts in, one bit per ciphertext out.

    The one-shot discipline is what the tracers are allowed to assume;
    a second call raises.
    """

    def __init__(self, fn: Callable[[Sequence[TTCiphertext], "PirateOracle"], np.ndarray], label: str = "pirate"):
        self._fn = fn
        self._spent = False
        self.label = label
        self.stats: dict = {}

    def answer(self, cts: Sequence[TTCiphertext]) -> np.ndarray:
        if self._spent:
            raise OneShotViolationError(f"{self.label} oracle already consumed")
        self._spent = True
        bits = np.asarray(self._fn(cts, self), dtype=np.uint8)
        if bits.shape != (len(cts),):
            raise InputShapeError(
                f"pirate returned {bits.shape} answers for {len(cts)} ciphertexts"
            )
        if bits.size and bits.max() > 1:
            raise InputShapeError("pirate answers must be bits")
        return bits


def _batch_arrays(cts: Sequence[TTCiphertext]) -> tuple[np.ndarray, np.ndarray]:
    rs = np.stack([c.rs for c in cts])
    ms = np.stack([c.masked for c in cts])
    return rs, ms


def honest_pirate(ks: TTKeySet, user: int) -> PirateOracle:
    """Decrypts every ciphertext with one user's key, honestly."""
    if not 0 <= user < ks.params.n:
        raise InputShapeError(f"no user {user} in a {ks.params.n}-user key set")
    key = ks.key(user)

    def fn(cts: Sequence[TTCiphertext], _o: PirateOracle) -> np.ndarray:
        if not cts:
            return np.zeros(0, dtype=np.uint8)
        rs, ms = _batch_arrays(cts)
        return enc_decrypt_many(key, rs[:, user], ms[:, user])

    return PirateOracle(fn, label=f"honest:{user}")


def zeros_pirate() -> PirateOracle:
    """Answers 0 everywhere; useful as a useless-decoder baseline."""
    return PirateOracle(
        lambda cts, _o: np.zeros(len(cts), dtype=np.uint8), label="zeros"
    )


@dataclass(eq=False)
class TTDecQueryFamily:
    """All tracing-query circuits of one batch, evaluated in bulk.

    Semantically this is [tt_dec_circuit(c) for c in batch]: circuit(j)
    materializes the exact netlist, evaluate_on_rows computes every
    circuit on every row by sharing the per-row PRG expansion instead of
    walking 50k netlists gate by gate.  The two routes are interchangeable
    (see the equivalence tests) — only the cost differs.
    """

    params: TTParams
    rs: np.ndarray      # (k, n) int64
    masked: np.ndarray  # (k, n) uint8
    mode: str = FOLDED

    @classmethod
    def from_ciphertexts(
        cls,
        cts: Sequence[TTCiphertext],
        params: TTParams,
        mode: str = FOLDED,
    ) -> "TTDecQueryFamily":
        if params.scheme != LOCAL_PRG:
            raise UnsupportedSchemeError(
                "decryption circuits exist only for LOCAL_PRG keys"
            )
        if not cts:
            return cls(params, np.zeros((0, params.n), np.int64), np.zeros((0, params.n), np.uint8), mode)
        rs, ms = _batch_arrays(cts)
        if rs.shape[1] != params.n:
            raise MalformedCiphertextError(
                f"ciphertexts have {rs.shape[1]} components, scheme has {params.n} users"
            )
        if rs.size and (rs.min() < 0 or rs.max() >= params.prg.ell):
            raise MalformedCiphertextError("PRG index outside stretch range")
        return cls(params, rs, ms, mode)

    def __len__(self) -> int:
        return int(self.rs.shape[0])

    @property
    def input_width(self) -> int:
        return self.params.kappa

    def circuit(self, j: int) -> Circuit:
        return tt_dec_circuit(
            TTCiphertext(self.rs[j], self.masked[j]), self.params, self.mode
        )

    def evaluate_on_rows(self, rows: np.ndarray) -> np.ndarray:
        """(k, m) bit matrix: circuit j on row m, for arbitrary kappa-bit rows."""
        arr = np.asarray(rows, dtype=np.uint8)
        if arr.ndim != 2 or arr.shape[1] != self.params.kappa:
            raise InputShapeError(
                f"rows must be (m, {self.params.kappa}), got shape {arr.shape}"
            )
        p = self.params
        ke, iw, n = p.enc_bits, p.index_bits, p.n
        m = arr.shape[0]
        out = np.zeros((len(self), m), dtype=np.uint8)
        if iw:
            weights = (1 << np.arange(iw - 1, -1, -1)).astype(np.int64)
            idxs = arr[:, ke : ke + iw].astype(np.int64) @ weights
        else:
            idxs = np.zeros(m, dtype=np.int64)
        for mi in range(m):
            u = int(idxs[mi])
            if u >= n:
                continue  # no indicator fires; the circuit outputs 0
            expansion = prg_expand(p.prg, arr[mi, :ke])
            out[:, mi] = expansion[self.rs[:, u]] ^ self.masked[:, u]
        return out


@dataclass(frozen=True)
class TraceOutcome:
    accused: int | None
    word: np.ndarray
    codebook: Codebook


def tt_trace_report(
    ks: TTKeySet,
    pirate: PirateOracle,
    eps_fp: float,
    rng: np.random.Generator,
    a: float = 100.0,
) -> TraceOutcome:
    """Fingerprint-driven tracing: one oracle call, then code tracing.

    Draws a fresh codebook, sends all ell_FP tracing ciphertexts in a
    single batch, and accuses whoever the code's scorer singles out.
    """
    cb = fp_gen(ks.params.n, eps_fp, rng, a=a)
    cts = tr_enc(ks, cb.words, rng)
    word = pirate.answer(cts)
    return TraceOutcome(fp_trace(cb, word), word, cb)


def tt_trace(
    ks: TTKeySet,
    pirate: PirateOracle,
    eps_fp: float,
    rng: np.random.Generator,
    a: float = 100.0,
) -> int | None:
    return tt_trace_report(ks, pirate, eps_fp, rng, a=a).accused


def default_scan_repetitions(n: int, beta: float = 0.05) -> int:
    """Chernoff repetition count: every level within 1/(2n) except prob beta."""
    if not 0 < beta < 1:
        raise InputShapeError(f"failure budget must be in (0,1), got {beta}")
    return math.ceil(4.0 * n * n * math.log(2.0 * (n + 1) / beta))


@dataclass(frozen=True)
class ScanOutcome:
    accused: int | None      # 1-based gap position; key row accused-1
    levels: np.ndarray       # (n+1,) estimated decryption rates
    counts: np.ndarray       # (n+1,) raw 1-answers per level
    repetitions: int


def linear_scan_report(
    ks: TTKeySet,
    pirate: PirateOracle,
    rng: np.random.Generator,
    repetitions: int | None = None,
    beta: float = 0.05,
) -> ScanOutcome:
    """Level-sweep tracing: estimate P_i at every level, accuse the first big jump.

    Sends each level i in {0..n} exactly s times, shuffled, in one
    oracle call; accuses the smallest i with P_i - P_{i-1} >= 1/n (the
    gap test is integer-exact).  The returned index is 1-based: it names
    the user whose component flips between levels i-1 and i, i.e. key
    row i-1.
    """
    n = ks.params.n
    s = default_scan_repetitions(n, beta) if repetitions is None else int(repetitions)
    if s < 1:
        raise InputShapeError(f"repetition count must be >= 1, got {s}")
    seq = rng.permutation(np.repeat(np.arange(n + 1), s))
    cols = (np.arange(n)[:, None] < seq[None, :]).astype(np.uint8)
    cts = tr_enc(ks, cols, rng)
    answers = pirate.answer(cts)
    counts = np.bincount(seq, weights=answers, minlength=n + 1).astype(np.int64)
    accused = None
    for i in range(1, n + 1):
        if n * (counts[i] - counts[i - 1]) >= s:
            accused = i
            break
    return ScanOutcome(accused, counts / float(s), counts, s)


def linear_scan_trace(
    ks: TTKeySet,
    pirate: PirateOracle,
    rng: np.random.Generator,
    repetitions: int | None = None,
    beta: float = 0.05,
) -> int | None:
    return linear_scan_report(ks, pirate, rng, repetitions, beta).accused


def keyset_to_json(ks: TTKeySet) -> dict:
    p = ks.params
    obj: dict = {
        "kappa": p.kappa,
        "n": p.n,
        "scheme": p.scheme,
        "rows": [np.packbits(r).tobytes().hex() for r in ks.rows],
    }
    if p.prg is not None:
        g = p.prg
        obj["prg"] = {
            "kappa": g.kappa,
            "ell": g.ell,
            "locality": g.locality,
            "table": np.packbits(g.table).tobytes().hex(),
            # 2-byte big-endian per position, row-major
            "index_sets": g.index_sets.astype(">u2").tobytes().hex(),
        }
    else:
        obj["prg"] = None
    return obj


def keyset_from_json(obj: dict) -> TTKeySet:
    try:
        kappa, n, scheme = int(obj["kappa"]), int(obj["n"]), obj["scheme"]
        prg_obj = obj["prg"]
        prg = None
        if prg_obj is not None:
            g_kappa = int(prg_obj["kappa"])
            g_ell = int(prg_obj["ell"])
            g_loc = int(prg_obj["locality"])
            table = np.unpackbits(
                np.frombuffer(bytes.fromhex(prg_obj["table"]), dtype=np.uint8)
            )[: 1 << g_loc]
            sets = (
                np.frombuffer(bytes.fromhex(prg_obj["index_sets"]), dtype=">u2")
                .reshape(g_ell, g_loc)
                .astype(np.int32)
            )
            prg = LocalPrgParams(g_kappa, g_ell, g_loc, sets, table.astype(np.uint8))
        raw_rows = obj["rows"]
        rows = np.zeros((n, kappa), dtype=np.uint8)
        for u, hexrow in enumerate(raw_rows):
            rows[u] = np.unpackbits(
                np.frombuffer(bytes.fromhex(hexrow), dtype=np.uint8)
            )[:kappa]
    except (KeyError, TypeError, ValueError) as e:
        raise FileFormatError(f"bad key set JSON: {e}") from e
    if len(raw_rows) != n:
        raise FileFormatError(f"expected {n} rows, found {len(raw_rows)}")
    params = TTParams(kappa, n, scheme, prg)
    ks = TTKeySet(params, rows)
    for u in range(n):
        _bits, idx = decode_key_row(params, rows[u])
        if idx != u:
            raise FileFormatError(f"row {u} decodes to index {idx}")
    return ks


def keyset_dumps(ks: TTKeySet) -> str:
    return json.dumps(keyset_to_json(ks), sort_keys=True, separators=(",", ":"))


def keyset_loads(text: str) -> TTKeySet:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as e:
        raise FileFormatError(f"key set is not valid JSON: {e}") from e
    return keyset_from_json(obj)
