"""Wong-Zakai temporal coarsening at fixed solver grid, squared-error slope."""
import argparse

from _common import BASE, print_rates
from fraccable.experiments import strong_error_wz, wz_time_spec

ap = argparse.ArgumentParser(description=__doc__)
ap.add_argument("--samples", type=int, default=200)
ap.add_argument("--seed", type=int, default=0)
ap.add_argument("--threads", type=int, default=2)
args = ap.parse_args()

spec = wz_time_spec(BASE, 64, 4096, [32, 64, 128, 256, 512], 128, n_samples=args.samples, seed=args.seed)
rep = strong_error_wz(spec, threads=args.threads)
print_rates(rep)
print(f"squared slope {rep.mse_slope:.4f}, theoretical {rep.theoretical_mse:.4f}, "
      f"pass {rep.within(0.3, 0.3, squared=True)}")
