"""Pure numpy versions of the compiled kernels, same signatures."""
import numpy as np


def schur_block(ptr, rows, cols, vals, var_ids, X, Sinv, M):
    n = X.shape[0]
    k = len(var_ids)
    dense = np.zeros((k, n, n))
    for a in range(k):
        sl = slice(ptr[a], ptr[a + 1])
        np.add.at(dense[a], (rows[sl], cols[sl]), vals[sl])
    # tr(A_i X A_j S^-1) = <A_i, (X A_j S^-1)^T>
    t = np.matmul(np.matmul(X, dense), Sinv)
    sub = dense.reshape(k, n * n) @ t.transpose(0, 2, 1).reshape(k, n * n).T
    M[np.ix_(var_ids, var_ids)] += sub


def xor_grid(f, n):
    ang = 2.0 * np.pi * np.arange(n) / n
    a1 = ang[:, None, None]
    b0 = ang[None, :, None]
    b1 = ang[None, None, :]
    return (
        f[0, 0] * np.cos(-b0)
        + f[0, 1] * np.cos(-b1)
        + f[1, 0] * np.cos(a1 - b0)
        + f[1, 1] * np.cos(a1 - b1)
    )
