"""Compiled inner loops for batched gate application."""

import numpy as np
from numba import njit


@njit(cache=True)
def hadamard_rows(amp, stride, alpha, beta, gamma):
    """``[a, b] -> [alpha a + beta b, beta a + gamma b]`` on every bit pair.

    ``amp`` is ``(B, N)``; ``stride`` is ``2**(n_q - q)`` for target qubit
    ``q``; the coefficients are per-row arrays of length ``B``.
    """
    B, N = amp.shape
    for row in range(B):
        al = alpha[row]
        be = beta[row]
        ga = gamma[row]
        for base in range(0, N, 2 * stride):
            for r in range(base, base + stride):
                a = amp[row, r]
                b = amp[row, r + stride]
                amp[row, r] = al * a + be * b
                amp[row, r + stride] = be * a + ga * b


@njit(cache=True)
def hadamard_ideal(amp, stride, h):
    B, N = amp.shape
    for row in range(B):
        for base in range(0, N, 2 * stride):
            for r in range(base, base + stride):
                a = amp[row, r]
                b = amp[row, r + stride]
                amp[row, r] = (a + b) * h
                amp[row, r + stride] = (a - b) * h


@njit(cache=True)
def diagonal_factor(single, pair, active):
    """Diagonal of ``prod_i u_i^{b_i} prod_{a<i} w_ai^{b_a b_i}`` over ``m`` qubits.

    ``single`` is ``(B, m)``, ``pair`` is ``(B, m, m)`` with ``pair[:, a, i]``
    for ``a < i``, ``active[a, i]`` flags which pairs carry a gate.  Bit
    ``m - 1 - i`` of the output index is qubit ``i`` (first qubit most
    significant).  Cost is ``O(2**m)`` per row.
    """
    B, m = single.shape
    size_out = 1 << m
    out = np.empty((B, size_out), dtype=np.complex128)
    G = np.empty(size_out, dtype=np.complex128)
    for row in range(B):
        F = out[row]
        F[0] = 1.0
        size = 1
        for i in range(m):
            # G[x] = prod of w_ai over set bits of x (qubit a is bit i-1-a)
            G[0] = 1.0
            for x in range(1, size):
                low = x & (-x)
                p = 0
                while (1 << p) != low:
                    p += 1
                a = i - 1 - p
                if active[a, i]:
                    G[x] = G[x ^ low] * pair[row, a, i]
                else:
                    G[x] = G[x ^ low]
            u = single[row, i]
            for x in range(size - 1, -1, -1):
                f = F[x]
                F[2 * x + 1] = f * u * G[x]
                F[2 * x] = f
            size *= 2
    return out
