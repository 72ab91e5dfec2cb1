"""Strong temporal convergence against a fine self-reference."""
import argparse

from _common import BASE, print_rates
from fraccable.experiments import strong_error_temporal, temporal_spec

ap = argparse.ArgumentParser(description=__doc__)
ap.add_argument("--samples", type=int, default=200)
ap.add_argument("--seed", type=int, default=0)
ap.add_argument("--threads", type=int, default=2)
ap.add_argument("--n-modes", type=int, default=64)
ap.add_argument("--ref-steps", type=int, default=4096)
args = ap.parse_args()

spec = temporal_spec(BASE, args.n_modes, args.ref_steps, [32, 64, 128, 256, 512], 2 * args.n_modes,
                     n_samples=args.samples, seed=args.seed)
rep = strong_error_temporal(spec, threads=args.threads)
print_rates(rep)
print("window", rep.theoretical - 0.25, rep.theoretical + 0.35, "pass", rep.within(0.25, 0.35))
