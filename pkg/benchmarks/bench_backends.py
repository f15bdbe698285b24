#!/usr/bin/env python3
"""Compare the numba kernel against the pure-numpy tape evaluator.

Times the same impedance tapes over dense frequency grids with both
backends and prints per-workload cost and speedup.  Run directly:

    python benchmarks/bench_backends.py [--points 200000] [--repeats 5]
"""
import argparse
import time

import numpy as np

from fdr_sense import backends
from fdr_sense._tape import compile_network
from fdr_sense.netlist import load_default_params, parse_netlist

NETLIST_LC = "L 64\nC 0.429\n"
NETLIST_LADDER = """
TL 22.5 1.6 3.55 30.6
PAR{
  C 1.75
  R 2200
}
L 36.3
C 0.3185
L 36.3
PAR{
  C 1.75
  R 2200
}
"""


def workloads():
    yield "series LC", compile_network(parse_netlist(NETLIST_LC))
    yield "diode ladder", compile_network(parse_netlist(NETLIST_LADDER))
    params = load_default_params()
    for state in ("00", "11"):
        yield f"antenna state {state}", compile_network(params.build(state))


def time_backend(name: str, tape, freqs: np.ndarray, repeats: int) -> float:
    backends.set_backend(name)
    backends.evaluate(tape, freqs[:64])  # warm-up / JIT compile
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        backends.evaluate(tape, freqs)
        best = min(best, time.perf_counter() - start)
    return best


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--points", type=int, default=200_000)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    freqs = np.linspace(0.5e9, 2.0e9, args.points)
    print(f"{args.points} frequency points, best of {args.repeats} runs\n")
    print(f"{'workload':<20} {'ops':>4} {'numpy ms':>10} {'numba ms':>10} "
          f"{'speedup':>8}")
    original = backends.active_backend()
    try:
        for label, tape in workloads():
            t_numpy = time_backend("numpy", tape, freqs, args.repeats)
            t_numba = time_backend("numba", tape, freqs, args.repeats)
            print(f"{label:<20} {tape.ops.shape[0]:>4} "
                  f"{t_numpy * 1e3:>10.2f} {t_numba * 1e3:>10.2f} "
                  f"{t_numpy / t_numba:>7.1f}x")
    finally:
        backends.set_backend(original)


if __name__ == "__main__":
    main()
