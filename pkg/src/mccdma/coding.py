"""Rate-1/2 parallel-concatenated convolutional turbo code and interleavers.

Two recursive systematic constituent encoders (feedback 13 octal, forward
15 octal, constraint length 4) run on the message and on an odd-even
preserving pseudo-random permutation of it. Both trellises are terminated
independently with 3 tail bits each. The rate-1/3 mother code is punctured
to rate 1/2 by keeping the full systematic stream and alternating the two
parity streams; tails go out unpunctured, so a block of K message bits
occupies 2K + 12 channel bits.

Decoding runs max-log-MAP constituent passes that exchange extrinsic
information for a configurable number of iterations (6 by default). All
soft values follow the convention that a positive LLR favors bit 0.

Encoder and decoder accept batches: a (blocks, K) array is processed in
one vectorized pass.
"""

from __future__ import annotations

import numpy as np

FEEDBACK_OCTAL = 0o13
FORWARD_OCTAL = 0o15
MEMORY = 3
NUM_STATES = 1 << MEMORY
TAIL_BITS_PER_ENCODER = 2 * MEMORY

_NEG = -1.0e30


def _build_trellis():
    """Tables indexed by (state, input): next state, parity bit, feedback bit."""
    next_state = np.zeros((NUM_STATES, 2), dtype=np.int64)
    parity = np.zeros((NUM_STATES, 2), dtype=np.int64)
    feedback = np.zeros(NUM_STATES, dtype=np.int64)
    fb_taps = FEEDBACK_OCTAL & (NUM_STATES - 1)  # memory taps of the feedback poly
    fw_taps = FORWARD_OCTAL & (NUM_STATES - 1)
    for s in range(NUM_STATES):
        fb = bin(s & fb_taps).count("1") & 1
        feedback[s] = fb
        for u in (0, 1):
            w = u ^ fb
            parity[s, u] = w ^ (bin(s & fw_taps).count("1") & 1)
            next_state[s, u] = (w << (MEMORY - 1)) | (s >> 1)
    return next_state, parity, feedback


_NEXT, _PARITY, _FEEDBACK = _build_trellis()

def _invert_trellis():
    """For each state, its two (predecessor, input) transitions."""
    prev = np.zeros((NUM_STATES, 2), dtype=np.int64)
    prev_u = np.zeros((NUM_STATES, 2), dtype=np.int64)
    for ns in range(NUM_STATES):
        found = [(s, u) for s in range(NUM_STATES) for u in (0, 1) if _NEXT[s, u] == ns]
        prev[ns] = [f[0] for f in found]
        prev_u[ns] = [f[1] for f in found]
    return prev, prev_u


_PREV, _PREV_U = _invert_trellis()

_USIGN = np.array([1.0, -1.0])
_PSIGN = 1.0 - 2.0 * _PARITY
_TAIL_U = _FEEDBACK
_TAIL_NEXT = _NEXT[np.arange(NUM_STATES), _TAIL_U]
_TAIL_USIGN = 1.0 - 2.0 * _TAIL_U
_TAIL_PSIGN = _PSIGN[np.arange(NUM_STATES), _TAIL_U]


def odd_even_permutation(length: int, seed: int) -> np.ndarray:
    """Seeded permutation mapping even positions to even and odd to odd.

    The parity-preserving structure guarantees that the alternating
    puncturing pattern transmits exactly one parity bit per message bit.
    """
    rng = np.random.default_rng(seed)
    perm = np.arange(length)
    perm[0::2] = rng.permutation(np.arange(0, length, 2))
    perm[1::2] = rng.permutation(np.arange(1, length, 2))
    return perm


def _rsc_encode(bits: np.ndarray):
    """Run one constituent encoder; returns (parity, tail_sys, tail_parity)."""
    n_blocks, k = bits.shape
    parity = np.zeros((n_blocks, k), dtype=np.int64)
    state = np.zeros(n_blocks, dtype=np.int64)
    for i in range(k):
        u = bits[:, i]
        parity[:, i] = _PARITY[state, u]
        state = _NEXT[state, u]
    tail_sys = np.zeros((n_blocks, MEMORY), dtype=np.int64)
    tail_par = np.zeros((n_blocks, MEMORY), dtype=np.int64)
    for i in range(MEMORY):
        u = _TAIL_U[state]
        tail_sys[:, i] = u
        tail_par[:, i] = _PARITY[state, u]
        state = _NEXT[state, u]
    return parity, tail_sys, tail_par


def puncture(systematic, parity1, parity2, tail1, tail2) -> np.ndarray:
    """Assemble the rate-1/2 wire word from the constituent streams.

    Layout per block: pairs (systematic k, parity k) for k = 0..K-1 where
    the parity alternates between the two encoders (encoder 1 on even k),
    followed by the two 6-bit terminated tails.
    """
    systematic = np.asarray(systematic)
    n_blocks, k = systematic.shape
    wire = np.zeros((n_blocks, 2 * k + 2 * TAIL_BITS_PER_ENCODER), dtype=systematic.dtype)
    wire[:, 0 : 2 * k : 2] = systematic
    even = np.arange(0, k, 2)
    odd = np.arange(1, k, 2)
    wire[:, 2 * even + 1] = np.asarray(parity1)[:, even]
    wire[:, 2 * odd + 1] = np.asarray(parity2)[:, odd]
    t1s, t1p = tail1
    t2s, t2p = tail2
    base = 2 * k
    wire[:, base : base + 6 : 2] = t1s
    wire[:, base + 1 : base + 6 : 2] = t1p
    wire[:, base + 6 : base + 12 : 2] = t2s
    wire[:, base + 7 : base + 12 : 2] = t2p
    return wire


def depuncture(wire: np.ndarray, block_length: int):
    """Split wire LLRs back into full-rate streams, zeros where punctured."""
    wire = np.asarray(wire, dtype=float)
    k = block_length
    expected = 2 * k + 2 * TAIL_BITS_PER_ENCODER
    if wire.shape[-1] != expected:
        raise ValueError(f"expected {expected} wire values, got {wire.shape[-1]}")
    systematic = wire[:, 0 : 2 * k : 2]
    parity1 = np.zeros_like(systematic)
    parity2 = np.zeros_like(systematic)
    even = np.arange(0, k, 2)
    odd = np.arange(1, k, 2)
    parity1[:, even] = wire[:, 2 * even + 1]
    parity2[:, odd] = wire[:, 2 * odd + 1]
    base = 2 * k
    tail1 = (wire[:, base : base + 6 : 2], wire[:, base + 1 : base + 6 : 2])
    tail2 = (wire[:, base + 6 : base + 12 : 2], wire[:, base + 7 : base + 12 : 2])
    return systematic, parity1, parity2, tail1, tail2


def _maxlog_bcjr(sys_llr, par_llr, prior, tail_sys, tail_par):
    """One terminated max-log-MAP pass; returns posterior LLRs per info bit."""
    n_blocks, k = sys_llr.shape
    lin = sys_llr + prior

    # branch metrics per step are formed on the fly; forward recursion
    alphas = np.empty((k, n_blocks, NUM_STATES))
    alpha = np.full((n_blocks, NUM_STATES), _NEG)
    alpha[:, 0] = 0.0
    for i in range(k):
        alphas[i] = alpha
        gamma = 0.5 * (
            lin[:, i, None, None] * _USIGN[None, None, :]
            + par_llr[:, i, None, None] * _PSIGN[None, :, :]
        )
        cand = alpha[:, _PREV] + gamma[:, _PREV, _PREV_U]
        alpha = cand.max(axis=2)
        alpha -= alpha.max(axis=1, keepdims=True)

    # backward through the deterministic tail, starting from the zero state
    beta = np.full((n_blocks, NUM_STATES), _NEG)
    beta[:, 0] = 0.0
    for i in range(MEMORY - 1, -1, -1):
        gamma_tail = 0.5 * (
            tail_sys[:, i, None] * _TAIL_USIGN[None, :]
            + tail_par[:, i, None] * _TAIL_PSIGN[None, :]
        )
        beta = gamma_tail + beta[:, _TAIL_NEXT]
        beta -= beta.max(axis=1, keepdims=True)

    # main backward recursion with posterior extraction
    posterior = np.empty((n_blocks, k))
    for i in range(k - 1, -1, -1):
        gamma = 0.5 * (
            lin[:, i, None, None] * _USIGN[None, None, :]
            + par_llr[:, i, None, None] * _PSIGN[None, :, :]
        )
        metric = gamma + beta[:, _NEXT]
        full = alphas[i][:, :, None] + metric
        posterior[:, i] = full[:, :, 0].max(axis=1) - full[:, :, 1].max(axis=1)
        beta = metric.max(axis=2)
        beta -= beta.max(axis=1, keepdims=True)
    return posterior


class TurboCode:
    """Encoder/decoder pair for one block length and interleaver seed."""

    def __init__(
        self,
        block_length: int,
        iterations: int = 6,
        interleaver_seed: int = 0,
        permutation: np.ndarray | None = None,
    ):
        if block_length < 2:
            raise ValueError("block length must be at least 2")
        if iterations < 1:
            raise ValueError("need at least one decoding iteration")
        self.block_length = block_length
        self.iterations = iterations
        if permutation is None:
            permutation = odd_even_permutation(block_length, interleaver_seed)
        else:
            permutation = np.asarray(permutation)
            if sorted(permutation.tolist()) != list(range(block_length)):
                raise ValueError("permutation is not a bijection on the block")
        self.permutation = permutation
        self.inverse_permutation = np.argsort(permutation)

    @property
    def coded_length(self) -> int:
        return 2 * self.block_length + 2 * TAIL_BITS_PER_ENCODER

    def encode(self, bits: np.ndarray) -> np.ndarray:
        """Encode (K,) or (blocks, K) message bits into wire bits."""
        bits = np.asarray(bits, dtype=np.int64)
        squeeze = bits.ndim == 1
        if squeeze:
            bits = bits[None, :]
        if bits.shape[1] != self.block_length:
            raise ValueError(
                f"expected blocks of {self.block_length} bits, got {bits.shape[1]}"
            )
        parity1, t1s, t1p = _rsc_encode(bits)
        parity2, t2s, t2p = _rsc_encode(bits[:, self.permutation])
        wire = puncture(bits, parity1, parity2, (t1s, t1p), (t2s, t2p))
        return wire[0] if squeeze else wire

    def decode(self, llrs: np.ndarray, iterations: int | None = None):
        """Iteratively decode wire LLRs.

        Parameters
        ----------
        llrs : ndarray, shape (coded_length,) or (blocks, coded_length)
            Received soft values, LLR 0 at erased positions.

        Returns
        -------
        (bits, posteriors)
            Hard decisions and the final per-bit posterior LLRs.
        """
        llrs = np.asarray(llrs, dtype=float)
        squeeze = llrs.ndim == 1
        if squeeze:
            llrs = llrs[None, :]
        sys_llr, p1, p2, tail1, tail2 = depuncture(llrs, self.block_length)
        perm = self.permutation
        n_iter = self.iterations if iterations is None else iterations

        prior1 = np.zeros_like(sys_llr)
        sys2 = sys_llr[:, perm]
        for _ in range(n_iter):
            post1 = _maxlog_bcjr(sys_llr, p1, prior1, *tail1)
            ext1 = post1 - sys_llr - prior1
            post2 = _maxlog_bcjr(sys2, p2, ext1[:, perm], *tail2)
            ext2 = post2 - sys2 - ext1[:, perm]
            prior1 = ext2[:, self.inverse_permutation]
        posterior = post2[:, self.inverse_permutation]
        bits = (posterior < 0).astype(np.int64)
        if squeeze:
            return bits[0], posterior[0]
        return bits, posterior


def turbo_encode(bits: np.ndarray, code: TurboCode) -> np.ndarray:
    return code.encode(bits)


def turbo_decode(llrs: np.ndarray, code: TurboCode):
    return code.decode(llrs)


class ChannelInterleaver:
    """Seeded frame-level permutation of coded bits or LLRs."""

    def __init__(self, length: int, seed: int):
        self.length = length
        self.permutation = np.random.default_rng(seed).permutation(length)
        self.inverse = np.argsort(self.permutation)

    def interleave(self, values: np.ndarray) -> np.ndarray:
        values = np.asarray(values)
        if values.shape[-1] != self.length:
            raise ValueError(f"expected length {self.length}, got {values.shape[-1]}")
        return values[..., self.permutation]

    def deinterleave(self, values: np.ndarray) -> np.ndarray:
        values = np.asarray(values)
        if values.shape[-1] != self.length:
            raise ValueError(f"expected length {self.length}, got {values.shape[-1]}")
        return values[..., self.inverse]
