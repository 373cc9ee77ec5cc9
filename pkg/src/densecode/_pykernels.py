"""Pure-Python (numpy) versions of the routines in ``_kernels.pyx``.

Same signatures and the same row-major string numbering; used when the
compiled extension is unavailable or ``DENSECODE_PURE=1`` is set.
"""
import numpy as np


def _digits(base, n):
    idx = np.arange(base**n, dtype=np.int64)
    for k in range(n):
        yield (idx // base ** (n - 1 - k)) % base


def letter_counts(base, n, letter_of_digit, n_letters):
    letters = np.asarray(letter_of_digit, dtype=np.int64)
    counts = np.zeros((base**n, n_letters), dtype=np.int64)
    if n == 0:
        return counts
    rows = np.arange(base**n)
    for digit in _digits(base, n):
        np.add.at(counts, (rows, letters[digit]), 1)
    return counts


def typical_mask(base, n, letter_of_digit, q, delta, tol=1e-9):
    q = np.asarray(q, dtype=np.float64)
    counts = letter_counts(base, n, letter_of_digit, len(q))
    width = delta * np.sqrt(n) * np.sqrt(q * (1.0 - q)) + tol
    return np.all(np.abs(counts - n * q) <= width, axis=1)
