"""Relaxation-kernel property checks and oracle agreement."""
from dataclasses import replace

from _common import BASE
from fraccable.experiments import kernel_oracle_agreement, kernel_property_suite

for a in (0.4, 0.6, 0.9):
    for b in (0.4, 0.6, 0.9):
        if b > a:
            continue
        for lam in (0.0, 1.0):
            rep = kernel_property_suite(replace(BASE, alpha=a, beta=b, lam=lam))
            bad = [k for k, (ok, _) in rep.checks.items() if not ok]
            print(f"alpha={a} beta={b} lam={lam}: {'ok' if not bad else 'FAIL ' + ','.join(bad)}")

rows = kernel_oracle_agreement()
print(f"oracle agreement: {len(rows)} points, max rel {max(r[-1] for r in rows):.2e}")
