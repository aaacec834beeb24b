"""Counter-based pseudo-random functions.

Every random quantity in the package is a pure function of integer
counters, so the same edge or the same walk step gives the same answer
no matter how often or in which order it is queried.  The mixer is the
splitmix64 finalizer; uniforms carry 53 bits.

Two independent domains are derived from one master seed:

* percolation: ``edge_uniform(perc_key(seed), replica, a, b)``
* walks: ``walk_base(seed, stream, replica)`` followed by
  ``walk_choice(base, k, deg)`` for step ``k >= 1``
"""
from __future__ import annotations

import numpy as np
from numba import njit

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S32 = np.uint64(32)
_S11 = np.uint64(11)
_LOW32 = np.uint64(0xFFFFFFFF)
_ONE = np.uint64(1)

PERC_TAG = np.uint64(0x70657263_6F6C6174)  # b"percolat"
WALK_TAG = np.uint64(0x77616C6B_73746570)  # b"walkstep"

_INV53 = 1.0 / 9007199254740992.0


def as_seed(seed: int) -> np.uint64:
    """Map any Python integer onto the unsigned 64-bit seed space."""
    return np.uint64(int(seed) % (1 << 64))


@njit(inline="always", cache=True)
def mix64(z):
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@njit(inline="always", cache=True)
def hash4(a, b, c, d):
    """Chain four unsigned words through the mixer."""
    h = mix64(a + GOLDEN)
    h = mix64(h ^ (b + GOLDEN))
    h = mix64(h ^ (c + GOLDEN))
    return mix64(h ^ (d + GOLDEN))


@njit(inline="always", cache=True)
def to_unit(h):
    """Top 53 bits of a word as a float in [0, 1)."""
    return np.float64(h >> _S11) * _INV53


@njit(inline="always", cache=True)
def perc_key(seed):
    return mix64(seed ^ PERC_TAG)


def percolation_key(seed) -> np.uint64:
    """``perc_key`` for use outside compiled code.

    Compiled functions hand uint64 results back as Python ints, which
    numba would retype as int64 on the next call whenever they fit;
    wrapping keeps the unsigned arithmetic intact.
    """
    return np.uint64(perc_key(as_seed(seed)))


@njit(inline="always", cache=True)
def edge_uniform(pkey, replica, a, b):
    """Uniform attached to the unordered edge {a, b} of int64 vertex keys."""
    if a > b:
        a, b = b, a
    return to_unit(hash4(pkey, np.uint64(replica), np.uint64(a), np.uint64(b)))


@njit(inline="always", cache=True)
def walk_base(seed, stream, replica):
    return hash4(mix64(seed ^ WALK_TAG), np.uint64(stream), np.uint64(replica), np.uint64(0))


@njit(inline="always", cache=True)
def walk_word(base, w):
    """64-bit word ``w`` of a walk stream (splitmix64 sequence)."""
    return mix64(base + (np.uint64(w) + _ONE) * GOLDEN)


@njit(inline="always", cache=True)
def walk_choice(base, k, deg):
    """Neighbor index in ``[0, deg)`` drawn for step ``k >= 1``.

    Step ``k`` consumes the 32-bit chunk ``k - 1`` of the stream: the
    high half of a word for even chunks, the low half for odd ones.  The
    index is ``floor(chunk * deg / 2**32)``, whose deviation from exact
    uniformity is below ``deg / 2**32``.
    """
    c = k - 1
    word = walk_word(base, c >> 1)
    if c & 1:
        chunk = word & _LOW32
    else:
        chunk = word >> _S32
    return np.int64((chunk * np.uint64(deg)) >> _S32)


@njit(cache=True)
def uniform_block(base, start, count):
    """``count`` uniforms from words ``start, start+1, ...`` of a stream."""
    out = np.empty(count, np.float64)
    for i in range(count):
        out[i] = to_unit(walk_word(base, start + i))
    return out
