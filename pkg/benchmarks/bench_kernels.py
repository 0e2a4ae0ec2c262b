"""Time the compiled kernels against the pure-Python fallback.

    python benchmarks/bench_kernels.py [--repeat N]
"""

from __future__ import annotations

import argparse
import math
import timeit

import numpy as np

from stablab import _fallback

try:
    from stablab import _kernels
except ImportError:  # extension not built
    _kernels = None


def cases(rng):
    table = rng.uniform(0, 1, (5_000, 10))
    etas = 1.0 / np.cumsum(np.full(5_001, 0.3))
    lams = np.array([1.0 / math.sqrt(max(1, i)) for i in range(100_001)])
    z = rng.uniform(-2, 2, 2_000)
    return {
        "hedge_expected_losses (5000x10)": lambda k: k.hedge_expected_losses(table, etas),
        "interval_rerm_tracking (m=1e5)": lambda k: k.interval_rerm_tracking(100_000, lams),
        "abs_reg_loo (m=2000)": lambda k: k.abs_reg_loo(z, 3.0, 0.0, -1.0, 1.0),
        "abs_prefix_hindsight (m=2000)": lambda k: k.abs_prefix_hindsight(z, -1.0, 1.0),
    }


def main(argv=None) -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args(argv)
    rng = np.random.default_rng(0)
    print(f"{'kernel':<36}{'python [s]':>12}{'compiled [s]':>14}{'speedup':>10}")
    for name, call in cases(rng).items():
        slow = min(timeit.repeat(lambda: call(_fallback), number=1, repeat=args.repeat))
        if _kernels is None:
            print(f"{name:<36}{slow:>12.4f}{'n/a':>14}{'n/a':>10}")
            continue
        fast = min(timeit.repeat(lambda: call(_kernels), number=1, repeat=args.repeat))
        print(f"{name:<36}{slow:>12.4f}{fast:>14.5f}{slow / fast:>9.1f}x")


if __name__ == "__main__":
    main()
