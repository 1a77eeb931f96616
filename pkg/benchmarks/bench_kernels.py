"""Time the compiled kernels against the pure-Python fallback.

    python benchmarks/bench_kernels.py [--repeat 3]

Each case runs once per backend on identical streams; the outputs are
compared so a speedup never hides a divergence.
"""
import argparse
import time

import numpy as np

from hypermajority import _backend, dual1d, slice2d
from hypermajority.dynamics import MajorityRule, VoterRule, generate_event_log, run
from hypermajority.lattice import Configuration, HyperedgeFamily, LatticeGeometry
from hypermajority.rng import RngStream


def majority_2d():
    g = LatticeGeometry.torus(64, 2)
    c = Configuration.bernoulli(g, RngStream(1))
    return run(c, MajorityRule(3), 10.0, RngStream(2)).final.bits.tobytes()


def voter_1d():
    g = LatticeGeometry.torus(400, 1)
    c = Configuration.bernoulli(g, RngStream(1))
    return run(c, VoterRule(), 50.0, RngStream(2)).final.bits.tobytes()


def event_log():
    log = generate_event_log(HyperedgeFamily(2, LatticeGeometry.torus(100, 2)), 5.0, RngStream(3))
    return log.times.tobytes() + log.anchors.tobytes()


def center_path():
    log = generate_event_log(HyperedgeFamily(3, LatticeGeometry.window((600,))), 100.0, RngStream(4))
    p = dual1d.center_path(300, 100.0, log, 3)
    return p.positions.tobytes()


def slice_run():
    return slice2d.simulate_slice(2000.0, RngStream(5)).states.tobytes()


CASES = [majority_2d, voter_1d, event_log, center_path, slice_run]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    names = _backend.available()
    print(f"{'case':<14}" + "".join(f"{n + ' (s)':>14}" for n in names) + f"{'speedup':>10}")
    for case in CASES:
        times, outs = [], []
        for name in names:
            with _backend.using(name):
                best = np.inf
                for _ in range(args.repeat):
                    t0 = time.perf_counter()
                    out = case()
                    best = min(best, time.perf_counter() - t0)
            times.append(best)
            outs.append(out)
        if any(o != outs[0] for o in outs):
            raise SystemExit(f"{case.__name__}: backends disagree")
        speed = f"{times[-1] / times[0]:.1f}x" if len(times) > 1 else "-"
        print(f"{case.__name__:<14}" + "".join(f"{t:>14.4f}" for t in times) + f"{speed:>10}")


if __name__ == "__main__":
    main()
