"""Classical post-processing: error correction and privacy amplification.

Turns a sifted key with a measured error rate into the net secret key rate
via the usual information-theoretic budget

    net = sift_rate * max(0, 1 - f * h2(q) - h2(q))

where h2 is the binary entropy, f >= 1 the reconciliation inefficiency, and
the whole yield is forced to zero at or above a configurable QBER threshold
(no secure key once the error rate is in the abort region).

The interactive pieces are simulated in-process with exact disclosure
accounting: a Cascade-style parity/bisection reconciliation (four passes,
doubling block sizes, seeded shuffles, with back-propagation of corrections
into earlier passes) and a seeded binary Toeplitz hash for privacy
amplification.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SecurityParams:
    """Post-processing knobs: abort threshold and reconciliation inefficiency."""

    qber_secure_threshold: float = 0.10
    ec_inefficiency_f: float = 1.16

    def __post_init__(self) -> None:
        if not 0.0 < self.qber_secure_threshold < 0.5:
            raise ValueError("qber_secure_threshold must be in (0, 0.5)")
        if self.ec_inefficiency_f < 1.0:
            raise ValueError("ec_inefficiency_f must be >= 1")


def binary_entropy(p: float) -> float:
    """h2(p) = -p log2 p - (1-p) log2 (1-p), with h2(0) = h2(1) = 0 exactly."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must be in [0, 1]")
    if p == 0.0 or p == 1.0:
        return 0.0
    return -p * math.log2(p) - (1.0 - p) * math.log2(1.0 - p)


def net_rate(sift_rate_bps: float, qber: float, params: SecurityParams) -> float:
    """Net secret-key rate (bit/s) after reconciliation and amplification.

    Zero at or above the abort threshold, and never negative: the entropy
    budget is clamped at zero once f*h2(q) + h2(q) exceeds one.
    """
    if sift_rate_bps < 0:
        raise ValueError("sift_rate_bps must be non-negative")
    if not 0.0 <= qber <= 1.0:
        raise ValueError("qber must be in [0, 1]")
    if qber >= params.qber_secure_threshold:
        return 0.0
    h = binary_entropy(qber)
    return sift_rate_bps * max(0.0, 1.0 - params.ec_inefficiency_f * h - h)


@dataclass(frozen=True)
class ReconciliationReport:
    """Outcome of one reconciliation session.

    parity_bits_leaked counts every parity Alice disclosed (all top-level
    block parities of every pass plus one per bisection level, including
    the re-searches triggered by back-propagation). residual_errors is a
    simulation-side ground-truth count, available because both keys live in
    the same process.
    """

    passes: int
    parity_bits_leaked: int
    residual_errors: int
    corrected_key_len: int
    corrected_errors: int
    initial_block_size: int


def _bisect_error(err: np.ndarray, idx: np.ndarray) -> tuple[int, int]:
    """Locate one flipped bit inside an odd-parity block by halving.

    Returns (bit_index, parities_disclosed). Each level discloses exactly
    one half-block parity; the other half's parity is inferred.
    """
    lo, hi = 0, idx.size
    leaked = 0
    while hi - lo > 1:
        mid = (lo + hi) // 2
        leaked += 1
        if int(err[idx[lo:mid]].sum()) & 1:
            hi = mid
        else:
            lo = mid
    return int(idx[lo]), leaked


def reconcile(
    alice_bits: np.ndarray,
    bob_bits: np.ndarray,
    qber_estimate: float,
    rng: np.random.Generator,
) -> tuple[np.ndarray, ReconciliationReport]:
    """Cascade-style parity reconciliation of bob_bits against alice_bits.

    Four passes over seeded permutations with block sizes doubling from
    roughly 0.73/qber_estimate. Every pass discloses all top-level block
    parities; odd blocks are bisected to a single flip. A flip re-odds the
    blocks holding that bit in the other passes, which are re-bisected in
    turn until every disclosed block is even again.

    Returns (corrected_bob, report). Inputs are not modified.
    """
    alice = np.asarray(alice_bits, dtype=np.uint8) & 1
    bob = np.asarray(bob_bits, dtype=np.uint8) & 1
    if alice.shape != bob.shape or alice.ndim != 1:
        raise ValueError("alice_bits and bob_bits must be 1-d and the same length")
    n = alice.size
    if n == 0:
        raise ValueError("cannot reconcile an empty key")
    if not 0.0 < qber_estimate < 0.5:
        raise ValueError("qber_estimate must be in (0, 0.5)")

    # err is the hidden difference pattern; parity comparisons on it are
    # exactly the Alice-parity vs Bob-parity comparisons of the protocol.
    err = (alice ^ bob).astype(np.uint8)
    block0 = max(2, min(n, math.ceil(0.73 / qber_estimate)))
    n_passes = 4

    perms: list[np.ndarray] = []
    sizes: list[int] = []
    blocks: list[list[np.ndarray]] = []
    block_of: list[np.ndarray] = []  # per pass: bit index -> block number
    for p in range(n_passes):
        perm = np.arange(n) if p == 0 else rng.permutation(n)
        size = min(n, block0 << p)
        perms.append(perm)
        sizes.append(size)
        pass_blocks = [perm[s : s + size] for s in range(0, n, size)]
        blocks.append(pass_blocks)
        owner = np.empty(n, dtype=np.int64)
        for b, idx in enumerate(pass_blocks):
            owner[idx] = b
        block_of.append(owner)

    leaked = 0
    corrected = 0
    disclosed = 0  # passes whose top-level parities are public so far

    def settle(queue: set[tuple[int, int]]) -> None:
        """Re-bisect queued (pass, block) pairs until all parities are even."""
        nonlocal leaked, corrected
        while queue:
            p, b = min(queue)
            queue.discard((p, b))
            idx = blocks[p][b]
            if not (int(err[idx].sum()) & 1):
                continue
            bit, used = _bisect_error(err, idx)
            leaked += used
            err[bit] ^= 1
            corrected += 1
            for q in range(disclosed):
                if q != p:
                    queue.add((q, int(block_of[q][bit])))
            if int(err[idx].sum()) & 1:  # more errors left in this block
                queue.add((p, b))

    for p in range(n_passes):
        leaked += len(blocks[p])
        disclosed = p + 1
        odd = {
            (p, b)
            for b, idx in enumerate(blocks[p])
            if int(err[idx].sum()) & 1
        }
        settle(odd)

    corrected_bob = alice ^ err
    report = ReconciliationReport(
        passes=n_passes,
        parity_bits_leaked=leaked,
        residual_errors=int(err.sum()),
        corrected_key_len=n,
        corrected_errors=corrected,
        initial_block_size=block0,
    )
    return corrected_bob, report


def privacy_amplify(bits: np.ndarray, seed: int, output_len: int) -> np.ndarray:
    """Compress bits with a seeded binary Toeplitz hash.

    The Toeplitz matrix T[i, j] = r[i - j + n - 1] over a seeded coin
    sequence r makes the map linear over GF(2):
    hash(a xor b) = hash(a) xor hash(b) for any keys a, b and fixed seed.
    Implemented as a mod-2 convolution.
    """
    key = np.asarray(bits, dtype=np.uint8) & 1
    if key.ndim != 1:
        raise ValueError("bits must be a 1-d array")
    n = key.size
    if output_len < 0:
        raise ValueError("output_len must be non-negative")
    if output_len > n:
        raise ValueError("output_len must not exceed the input length")
    if output_len == 0:
        return np.zeros(0, dtype=np.uint8)
    rng = np.random.Generator(np.random.PCG64(seed))
    coins = rng.integers(0, 2, n + output_len - 1, dtype=np.uint8)
    conv = np.convolve(key.astype(np.int64), coins.astype(np.int64))
    return (conv[n - 1 : n - 1 + output_len] & 1).astype(np.uint8)


@dataclass(frozen=True)
class DistillationResult:
    """End-to-end key distillation outcome for one sifted key."""

    alice_key: np.ndarray
    bob_key: np.ndarray
    qber_estimate: float
    final_length: int
    reconciliation: ReconciliationReport

    @property
    def identical(self) -> bool:
        return bool(np.array_equal(self.alice_key, self.bob_key))

    def alice_hex(self) -> str:
        return key_to_hex(self.alice_key)

    def bob_hex(self) -> str:
        return key_to_hex(self.bob_key)


def key_to_hex(bits: np.ndarray) -> str:
    """Pack a bit array MSB-first into hex text (empty key -> empty string)."""
    key = np.asarray(bits, dtype=np.uint8) & 1
    if key.size == 0:
        return ""
    return np.packbits(key).tobytes().hex()


def distill(
    alice_bits: np.ndarray,
    bob_bits: np.ndarray,
    params: SecurityParams,
    seed: int,
) -> DistillationResult:
    """Reconcile then privacy-amplify one sifted key pair.

    The QBER estimate is taken from the full key comparison (a simulation
    shortcut for the sampling a deployed link would sacrifice bits for).
    The final length follows the net-rate entropy budget, additionally
    capped by the bits actually disclosed during reconciliation; it is zero
    when the error rate is at or above the abort threshold.
    """
    alice = np.asarray(alice_bits, dtype=np.uint8) & 1
    bob = np.asarray(bob_bits, dtype=np.uint8) & 1
    if alice.shape != bob.shape or alice.ndim != 1 or alice.size == 0:
        raise ValueError("keys must be equal-length, non-empty 1-d bit arrays")
    n = alice.size
    q = float(np.count_nonzero(alice != bob)) / n
    rng = np.random.Generator(np.random.PCG64(seed))
    estimate = min(max(q, 1.0 / n), 0.499)
    corrected, report = reconcile(alice, bob, estimate, rng)
    if q >= params.qber_secure_threshold:
        final_len = 0
    else:
        h = binary_entropy(q)
        budget = math.floor(n * max(0.0, 1.0 - params.ec_inefficiency_f * h - h))
        final_len = max(0, min(budget, n - report.parity_bits_leaked))
    alice_final = privacy_amplify(alice, seed + 1, final_len)
    bob_final = privacy_amplify(corrected, seed + 1, final_len)
    return DistillationResult(
        alice_key=alice_final,
        bob_key=bob_final,
        qber_estimate=q,
        final_length=final_len,
        reconciliation=report,
    )
