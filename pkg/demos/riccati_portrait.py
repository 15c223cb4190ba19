"""Phase portrait of the matrix Riccati flow C' = C^2.

Shows the three spectral regimes of a 2x2 block (real, nilpotent,
rotation-dilation), the rational trace/det evolution, and the finite-time
blowup of a positive real eigenvalue.

Run:  python3 demos/riccati_portrait.py
"""

import numpy as np

from geonull.splitting import (
    RiccatiBlowupError,
    classify,
    riccati_closed_form,
    trace_det_evolution,
)

np.set_printoptions(precision=5, suppress=True)

blocks = {
    "real": np.array([[0.8, 0.0], [0.0, -0.5]]),
    "nilpotent": np.array([[0.0, 1.0], [0.0, 0.0]]),
    "complex_pair": np.array([[0.3, 1.0], [-1.0, 0.3]]),
}

for name, c0 in blocks.items():
    inv = classify(c0)
    print(f"{name}: eigenvalues {np.round(inv.eigenvalues, 5)}")
    for t in (0.0, 0.5, 1.0):
        try:
            ct = riccati_closed_form(c0, t)
            tr, det = trace_det_evolution(float(np.trace(c0)), float(np.linalg.det(c0)), t)
            print(f"  t={t:3.1f}  trace {np.trace(ct):+8.4f} (law {tr:+8.4f})  det {np.linalg.det(ct):+8.4f} (law {det:+8.4f})")
        except RiccatiBlowupError as exc:
            print(f"  t={t:3.1f}  blowup: {exc}")
    print()

print("positive real eigenvalue 2 blows up at t = 1/2:")
for t in (0.4, 0.49, 0.499):
    value = riccati_closed_form([[2.0]], t)[0, 0]
    print(f"  t={t:5.3f}  C = {value:12.3f}")
try:
    riccati_closed_form([[2.0]], 0.5)
except RiccatiBlowupError as exc:
    print(f"  t=0.500  raised RiccatiBlowupError: {exc}")
