"""Counter-based random streams.

Every random quantity in the library is a pure function of a 64-bit seed and
integer counters (row, column, stream id). Values are produced by a splitmix64
finalizer chain, so generation order, chunking, and thread count can never
change the output.
"""

from __future__ import annotations

import numpy as np

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MUL1 = 0xBF58476D1E4E5B9F
_MUL2 = 0x94D049BB133111EB

_U_GOLDEN = np.uint64(_GOLDEN)
_U_MUL1 = np.uint64(_MUL1)
_U_MUL2 = np.uint64(_MUL2)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)


def mix64(*parts: int) -> int:
    """Hash integers into one well-scrambled 64-bit value.

    Used to derive independent child seeds: mix64(base_seed, trial, ...).
    Accepts negative ints (reduced mod 2**64).
    """
    h = 0x632BE59BD9B4E019
    for p in parts:
        h = (h + (int(p) & _MASK) + _GOLDEN) & _MASK
        h ^= h >> 30
        h = (h * _MUL1) & _MASK
        h ^= h >> 27
        h = (h * _MUL2) & _MASK
        h ^= h >> 31
    return h


def mix64_str(seed: int, text: str) -> int:
    """Seed variant keyed by a string, stable across runs and processes."""
    h = mix64(seed, len(text))
    for ch in text.encode("utf-8"):
        h = mix64(h, ch)
    return h


def _finalize(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> _S30)) * _U_MUL1
    z = (z ^ (z >> _S27)) * _U_MUL2
    return z ^ (z >> _S31)


def _bits_grid(seed: int, n_rows: int, n_cols: int, stream: int) -> np.ndarray:
    key = np.uint64(mix64(seed, stream))
    rows = np.arange(n_rows, dtype=np.uint64)[:, None]
    cols = np.arange(n_cols, dtype=np.uint64)[None, :]
    h = _finalize(key + rows * _U_GOLDEN)
    return _finalize(h + cols * _U_MUL1 + _U_GOLDEN)


def uniform_grid(seed: int, n_rows: int, n_cols: int, stream: int = 0) -> np.ndarray:
    """(n_rows, n_cols) uniforms on the open interval (0, 1).

    Cell (i, j) depends only on (seed, i, j, stream): slicing a larger grid
    reproduces a smaller one bit for bit.
    """
    bits = _bits_grid(seed, n_rows, n_cols, stream)
    # 53-bit mantissa, offset by half a quantum: never exactly 0 or 1.
    return ((bits >> _S11).astype(np.float64) + 0.5) * 2.0**-53


def sign_grid(seed: int, n_rows: int, n_cols: int, stream: int = 0) -> np.ndarray:
    """(n_rows, n_cols) array of independent fair signs (+1.0 / -1.0)."""
    bits = _bits_grid(seed, n_rows, n_cols, stream)
    return np.where(bits & np.uint64(1), 1.0, -1.0)
