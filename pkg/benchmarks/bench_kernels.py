"""Compare the compiled kernels with the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat N]

Prints best-of-N wall times for the Schur-complement assembly used by the
interior-point solver and for the XOR-game grid search, plus the maximum
absolute difference between the two implementations.
"""
import argparse
import time

import numpy as np

from singlet_selftest.kernels import IMPLEMENTATIONS
from singlet_selftest.sdp.moments import assemble_sdp, fig5_configs
from singlet_selftest.sdp.solver import to_standard_form


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t)
    return min(times), out


def schur_case():
    sf = to_standard_form(assemble_sdp(fig5_configs(0.01)[0]))
    rng = np.random.default_rng(0)
    mats = []
    for blk in sf.blocks:
        g = rng.standard_normal((blk.size, blk.size))
        x = g @ g.T + blk.size * np.eye(blk.size)
        h = rng.standard_normal((blk.size, blk.size))
        s = h @ h.T + blk.size * np.eye(blk.size)
        mats.append((x, np.linalg.inv(s)))
    return sf, mats


def run_schur(mod, sf, mats):
    M = np.zeros((sf.n_vars, sf.n_vars))
    for blk, (x, si) in zip(sf.blocks, mats):
        mod.schur_block(blk.ptr, blk.rows, blk.cols, blk.vals, blk.var_ids, x, si, M)
    return M


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--grid", type=int, default=64)
    args = ap.parse_args()

    sf, mats = schur_case()
    f = np.array([[np.sqrt(2), -np.sqrt(2)], [np.sqrt(2), np.sqrt(2)]])
    results = {}
    print(f"{'kernel':<8}{'impl':<10}{'best (ms)':>12}")
    for name, mod in sorted(IMPLEMENTATIONS.items()):
        t_s, m = best_of(lambda: run_schur(mod, sf, mats), args.repeat)
        t_x, g = best_of(lambda: mod.xor_grid(f, args.grid), args.repeat)
        results[name] = (m, np.asarray(g))
        print(f"{'schur':<8}{name:<10}{1e3 * t_s:>12.3f}")
        print(f"{'xor':<8}{name:<10}{1e3 * t_x:>12.3f}")
    if len(results) == 2:
        (ma, ga), (mb, gb) = results["compiled"], results["python"]
        print(f"max |schur diff| = {np.abs(ma - mb).max():.3e}")
        print(f"max |xor diff|   = {np.abs(ga - gb).max():.3e}")
    else:
        print("compiled extension not built; only the fallback was timed")


if __name__ == "__main__":
    main()
