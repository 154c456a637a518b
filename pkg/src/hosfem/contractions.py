"""Sum-factorized application of the discrete gradient.

The three directional derivative operators on an element are Kronecker
products of the 1-D differentiation matrix D with identities:

    along r:  I (x) I (x) D      (fastest node index)
    along s:  I (x) D (x) I
    along t:  D (x) I (x) I      (slowest node index)

Sum factorization applies each as a one-dimensional contraction over one
axis of the (k, j, i) node cube, 2 n1**4 flops per element instead of the
2 n1**6 of an expanded matrix.

Every contraction goes through np.einsum with optimize=False so it runs in
a single fixed-order C loop.  That keeps results bitwise reproducible
independent of the BLAS backend and of how many worker threads the caller
uses for element batching.
"""

from __future__ import annotations

import numpy as np

__all__ = ["contract_r", "contract_s", "contract_t", "apply_gradient", "gradient_matrices"]


def _cube(x: np.ndarray) -> np.ndarray:
    n3 = x.shape[-1]
    n1 = round(n3 ** (1.0 / 3.0))
    if n1**3 != n3:
        raise ValueError(f"last axis length {n3} is not a perfect cube")
    return x.reshape(x.shape[:-1] + (n1, n1, n1))


def contract_r(x: np.ndarray, dmat: np.ndarray, transpose: bool = False) -> np.ndarray:
    """Contract the differentiation matrix along the fastest (r) node axis.

    x has node values on its last axis, flat length n1**3, any leading batch
    shape.  With transpose=True the transposed matrix is applied.
    """
    d = dmat.T if transpose else dmat
    out = np.einsum("in,...kjn->...kji", d, _cube(x), optimize=False)
    return out.reshape(x.shape)


def contract_s(x: np.ndarray, dmat: np.ndarray, transpose: bool = False) -> np.ndarray:
    """Contract along the middle (s) node axis."""
    d = dmat.T if transpose else dmat
    out = np.einsum("jn,...kni->...kji", d, _cube(x), optimize=False)
    return out.reshape(x.shape)


def contract_t(x: np.ndarray, dmat: np.ndarray, transpose: bool = False) -> np.ndarray:
    """Contract along the slowest (t) node axis."""
    d = dmat.T if transpose else dmat
    out = np.einsum("kn,...nji->...kji", d, _cube(x), optimize=False)
    return out.reshape(x.shape)


def apply_gradient(x: np.ndarray, dmat: np.ndarray):
    """All three directional derivatives of a nodal field at once."""
    return (
        contract_r(x, dmat),
        contract_s(x, dmat),
        contract_t(x, dmat),
    )


def gradient_matrices(dmat: np.ndarray) -> np.ndarray:
    """Dense (3, n1**3, n1**3) Kronecker expansion of the gradient.

    Reference path for oracle tests and dense assembly; the matrix-free
    contractions above must match it to rounding.
    """
    n1 = dmat.shape[0]
    eye = np.eye(n1)
    return np.stack(
        [
            np.kron(eye, np.kron(eye, dmat)),
            np.kron(eye, np.kron(dmat, eye)),
            np.kron(dmat, np.kron(eye, eye)),
        ]
    )
