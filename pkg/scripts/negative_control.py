"""conj(z)(z - c1)(z - c2) on circles centered at c1 and c2.

All moments of order m >= 0 vanish on both families of circles, yet the
function is polyanalytic of order 1, not analytic.  The two families do
not form a chain, so no conclusion can be drawn from the moments alone.
"""

import numpy as np

from polychain import analyze_circle, merom_test
from polychain.chains import CircleT
from polychain.functions import DEFAULT_CONJ_POLY_CENTERS, conj_poly
from polychain.laurent import moment
from polychain.polyfit import annulus_samples, order_detect

if __name__ == "__main__":
    fn = conj_poly(DEFAULT_CONJ_POLY_CENTERS)
    worst = 0.0
    for c in DEFAULT_CONJ_POLY_CENTERS:
        for r in np.linspace(0.05, 0.6, 12):
            data = analyze_circle(fn, CircleT(c, r, 0.0), 1024, 256)
            worst = max(worst, merom_test(data, 0).defect)
            worst = max(worst, max(abs(moment(data, m)) for m in range(8)) / r)
    z = annulus_samples(2000, 0.3, 0.9, seed=0)
    det = order_detect(z, fn(z), nu_max=6, D=8, tol=1e-6)
    print(f"max moment defect on centered circles: {worst:.2e}")
    print(f"detected polyanalytic order: {det.order} (residuals {['%.1e' % r for r in det.residuals]})")
