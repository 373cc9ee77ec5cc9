# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled enumeration kernels for typical-sequence bookkeeping.

Index strings are enumerated in row-major order: string number ``k`` has
digits ``d_0 ... d_{n-1}`` with ``d_0`` the most significant base-``base``
digit. Each digit is mapped to a letter through ``letter_of_digit``.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, sqrt

cnp.import_array()


def letter_counts(Py_ssize_t base, Py_ssize_t n, letter_of_digit, Py_ssize_t n_letters):
    cdef cnp.int64_t[::1] letters = np.ascontiguousarray(letter_of_digit, dtype=np.int64)
    cdef Py_ssize_t total = base ** n
    out = np.zeros((total, n_letters), dtype=np.int64)
    cdef cnp.int64_t[:, ::1] counts = out
    cdef cnp.int64_t[::1] digits = np.zeros(max(n, 1), dtype=np.int64)
    cdef cnp.int64_t[::1] cur = np.zeros(n_letters, dtype=np.int64)
    cdef Py_ssize_t k, j, x
    cur[letters[0]] = n
    for k in range(total):
        for x in range(n_letters):
            counts[k, x] = cur[x]
        # odometer increment, least significant digit last
        j = n - 1
        while j >= 0:
            cur[letters[digits[j]]] -= 1
            digits[j] += 1
            if digits[j] < base:
                cur[letters[digits[j]]] += 1
                break
            digits[j] = 0
            cur[letters[0]] += 1
            j -= 1
    return out


def typical_mask(Py_ssize_t base, Py_ssize_t n, letter_of_digit, q, double delta, double tol=1e-9):
    cdef cnp.int64_t[::1] letters = np.ascontiguousarray(letter_of_digit, dtype=np.int64)
    cdef double[::1] qv = np.ascontiguousarray(q, dtype=np.float64)
    cdef Py_ssize_t n_letters = qv.shape[0]
    cdef Py_ssize_t total = base ** n
    out = np.zeros(total, dtype=np.bool_)
    cdef cnp.npy_bool[::1] mask = out
    cdef double[::1] centre = np.empty(n_letters, dtype=np.float64)
    cdef double[::1] width = np.empty(n_letters, dtype=np.float64)
    cdef cnp.int64_t[::1] digits = np.zeros(max(n, 1), dtype=np.int64)
    cdef cnp.int64_t[::1] cur = np.zeros(n_letters, dtype=np.int64)
    cdef Py_ssize_t k, j, x
    cdef bint ok
    for x in range(n_letters):
        centre[x] = n * qv[x]
        width[x] = delta * sqrt(<double> n) * sqrt(qv[x] * (1.0 - qv[x])) + tol
    cur[letters[0]] = n
    for k in range(total):
        ok = True
        for x in range(n_letters):
            if fabs(cur[x] - centre[x]) > width[x]:
                ok = False
                break
        mask[k] = ok
        j = n - 1
        while j >= 0:
            cur[letters[digits[j]]] -= 1
            digits[j] += 1
            if digits[j] < base:
                cur[letters[digits[j]]] += 1
                break
            digits[j] = 0
            cur[letters[0]] += 1
            j -= 1
    return out
