"""Counter-based randomness: every draw is a pure function of an integer key tuple."""

from __future__ import annotations

import hashlib

import numpy as np

_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)


def derive_seed(seed: int, label: str) -> int:
    """Stable 63-bit subsystem seed from a master seed and a label."""
    h = hashlib.blake2b(f"{int(seed)}:{label}".encode(), digest_size=8).digest()
    return int.from_bytes(h, "little") >> 1


def _mix(x: np.ndarray) -> np.ndarray:
    # splitmix64 finalizer
    x = (x ^ (x >> np.uint64(30))) * _M1
    x = (x ^ (x >> np.uint64(27))) * _M2
    return x ^ (x >> np.uint64(31))


def hash_u64(*keys) -> np.ndarray:
    """Hash broadcastable integer key arrays to uint64 words."""
    with np.errstate(over="ignore"):
        arrays = np.broadcast_arrays(*[np.asarray(k).astype(np.uint64) for k in keys])
        h = np.full(arrays[0].shape, _GOLDEN, dtype=np.uint64)
        for a in arrays:
            h = _mix(h ^ (a + _GOLDEN))
    return h


def uniform_bits(bits: int, *keys) -> np.ndarray:
    """Integers uniform in ``[0, 2**bits)`` keyed by ``keys`` (``bits <= 63``)."""
    return (hash_u64(*keys) >> np.uint64(64 - bits)).astype(np.int64)


def uniform01(*keys) -> np.ndarray:
    """Doubles uniform in ``[0, 1)`` keyed by ``keys``."""
    return uniform_bits(53, *keys).astype(np.float64) * 2.0**-53
