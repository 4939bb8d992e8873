"""Explicit matrix realizations of the unitary/symplectic bases.

All builders take 1-based row/column indices so that the code reads like the
multiplication tables it implements.  Matrices are complex ``(n, n)`` arrays;
every generator produced here is skew-Hermitian and traceless.
"""
from __future__ import annotations

import numpy as np


def e_matrix(n: int, j: int, k: int) -> np.ndarray:
    """E_jk: lone 1 where row j meets column k (1-based)."""
    m = np.zeros((n, n), dtype=complex)
    m[j - 1, k - 1] = 1.0
    return m


def a_matrix(n: int, j: int, k: int) -> np.ndarray:
    """A_jk = i(E_jj - E_kk)."""
    return 1j * (e_matrix(n, j, j) - e_matrix(n, k, k))


def b_matrix(n: int, j: int, k: int) -> np.ndarray:
    """B_jk = E_jk - E_kj.  Note B_jj = 0."""
    return e_matrix(n, j, k) - e_matrix(n, k, j)


def c_matrix(n: int, j: int, k: int) -> np.ndarray:
    """C_jk = i(E_jk + E_kj).  Note C_jj = 2i E_jj."""
    return 1j * (e_matrix(n, j, k) + e_matrix(n, k, j))


def alpha_coeff(j: int) -> float:
    """Normalization alpha_j = sqrt(j(j+1)/2) for the diagonal directions."""
    return float(np.sqrt(j * (j + 1) / 2.0))


def s_matrix(n: int, j: int) -> np.ndarray:
    """Orthonormalized diagonal direction S_j = (1/alpha_j) sum_{l<=j} l A_{l,l+1}."""
    if not 1 <= j <= n - 1:
        raise ValueError(f"S_{j} does not exist in dimension {n}")
    acc = np.zeros((n, n), dtype=complex)
    for l in range(1, j + 1):
        acc += l * a_matrix(n, l, l + 1)
    return acc / alpha_coeff(j)


def block_offsets(block_sizes: tuple[int, ...]) -> list[int]:
    offs = [0]
    for size in block_sizes:
        offs.append(offs[-1] + size)
    return offs


def block_embed(block_sizes: tuple[int, ...], which: int, mat: np.ndarray) -> np.ndarray:
    """Place ``mat`` as block ``which`` (0-based) of a block-diagonal matrix."""
    offs = block_offsets(block_sizes)
    n = offs[-1]
    if mat.shape != (block_sizes[which], block_sizes[which]):
        raise ValueError("block size mismatch")
    full = np.zeros((n, n), dtype=complex)
    lo, hi = offs[which], offs[which + 1]
    full[lo:hi, lo:hi] = mat
    return full
