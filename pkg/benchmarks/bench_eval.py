"""Benchmark the two expression-evaluation kernels against each other.

The package compiles scalar expressions into a postfix stack program and
evaluates it either with the Cython kernel (``stcalc._expr_eval``) or the
pure-Python fallback (``stcalc._expr_eval_py``).  This script times both
on the same compiled programs and checks they agree bit-for-bit-ish.

Run:  python3 benchmarks/bench_eval.py [--evals N] [--depth D] [--seed S]
"""

import argparse
import time

import numpy as np

from stcalc import _expr_eval_py
from stcalc.exprs import (
    comp,
    comp_bar,
    compile_program,
    const,
    coord,
    cos,
    kernel_name,
    power,
    sin,
)
from stcalc.extended_fields import BundleSignature, random_point
from stcalc.spintensor_core import SpinType

try:
    from stcalc import _expr_eval

    HAVE_COMPILED = True
except ImportError:
    _expr_eval = None
    HAVE_COMPILED = False

SIG = BundleSignature((SpinType(1, 0, 0, 0, 0, 0), SpinType(0, 0, 0, 0, 1, 0)))


def random_tree(rng, depth):
    """A random scalar expression over coordinates and argument components.

    Magnitudes are kept small (scaled constants, damped trig arguments,
    square powers only) so deeply nested programs stay in range.
    """
    if depth == 0 or rng.random() < 0.25:
        kind = rng.integers(4)
        if kind == 0:
            return const(0.3 * complex(rng.normal(), rng.normal()))
        if kind == 1:
            return coord(int(rng.integers(4)))
        P = int(rng.integers(1, SIG.nslots + 1))
        lin = int(rng.integers(SIG.stype(P).count))
        return comp(P, lin) if kind == 2 else comp_bar(P, lin)
    kind = rng.integers(6)
    a = random_tree(rng, depth - 1)
    if kind == 0:
        return a + random_tree(rng, depth - 1)
    if kind == 1:
        return a - random_tree(rng, depth - 1)
    if kind in (2, 3):
        return a * random_tree(rng, depth - 1)
    if kind == 4:
        damped = const(0.3) * a
        return sin(damped) if rng.integers(2) else cos(damped)
    return power(a, 2)


def time_kernel(kernel, prog, envs, stack):
    start = time.perf_counter()
    acc = 0.0 + 0.0j
    for env in envs:
        acc += kernel.eval_program(prog.codes, prog.iargs, prog.consts, env, stack)
    return time.perf_counter() - start, acc


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--evals", type=int, default=20000)
    ap.add_argument("--depth", type=int, default=7)
    ap.add_argument("--trees", type=int, default=8)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    offsets = SIG.offsets()
    progs = [
        compile_program(random_tree(rng, args.depth), offsets)
        for _ in range(args.trees)
    ]
    sizes = [len(p.codes) for p in progs]
    envs = [
        SIG.env_of(random_point(SIG, rng, arg_scale=0.5)) for _ in range(args.evals)
    ]
    stack = np.empty(max(p.stack_need for p in progs), dtype=np.complex128)

    print(f"active kernel in this process: {kernel_name()}")
    print(
        f"{args.trees} programs of {min(sizes)}..{max(sizes)} ops, "
        f"{args.evals} evaluations each"
    )

    rows = []
    for label, kernel in (
        ("pure python", _expr_eval_py),
        ("cython", _expr_eval),
    ):
        if kernel is None:
            print(f"{label:>12}: extension not built, skipped")
            continue
        total = 0.0
        checksum = 0.0 + 0.0j
        for prog in progs:
            dt, acc = time_kernel(kernel, prog, envs, stack)
            total += dt
            checksum += acc
        rate = args.trees * args.evals / total
        rows.append((label, total, rate, checksum))
        print(f"{label:>12}: {total:8.3f}s  {rate:12.0f} evals/s")

    if len(rows) == 2:
        drift = abs(rows[0][3] - rows[1][3])
        print(f"     speedup: {rows[0][1] / rows[1][1]:.1f}x (cython over pure)")
        print(f"    checksum: agreement |delta| = {drift:.3e}")


if __name__ == "__main__":
    main()
