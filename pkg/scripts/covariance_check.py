"""Empirical vs analytic covariance of fBm-sheet cell increments."""
from fraccable.experiments import covariance_study
from fraccable.model import HurstPair

for h1 in (0.3, 0.5):
    for h2 in (0.3, 0.5):
        rep = covariance_study(HurstPair(h1, h2), 4, 4, 20000, seed=2024)
        print(f"H1={h1} H2={h2}: max z {rep.max_z:.2f}, coarsening {rep.coarsening_error:.1e}, "
              f"pass {rep.passed}")
