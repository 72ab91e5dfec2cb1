"""Tail decay of the solution operator applied to rough data."""
from dataclasses import replace

from _common import BASE
from fraccable.experiments import spectral_operator_decay

for s in (0.6, 0.8):
    rep = spectral_operator_decay(replace(BASE, s=s))
    print(f"s={s}: slope {rep.slope:.3f} +- {rep.slope_stderr:.3f}, bound {rep.bound:.2f}, pass {rep.passed}")
