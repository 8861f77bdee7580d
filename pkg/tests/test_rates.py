"""Growth-rate checks for the worked coefficient families beyond the
acceptance grid: normalizer and supremum exponents fitted on log-log grids.
"""

import numpy as np
import pytest

from stablefield import coeffs as cf
from stablefield import lattice as lat
from stablefield import normalizer as nz
from stablefield import slowvary as sv
from stablefield import weights as wt

L1 = sv.constant(1.0)


def fit_slope(ns, vals):
    return float(np.polyfit(np.log(ns), np.log(vals), 1)[0])


class TestFractionalFamily:
    def test_normalizer_exponent(self):
        # B_n grows like n^(b1 + b2 + 2/alpha); pre-asymptotic drift at
        # small n is visible, so fit high on the grid
        b1 = b2 = 0.3
        alpha = 1.9
        model = cf.Farima(b1, b2)
        bs = []
        for n in (512, 1024):
            f = wt.build_weights(model, lat.cube(n, 2), alpha, L1)
            bs.append(nz.solve_Bn(f, alpha, L1).B_n)
        want = b1 + b2 + 2.0 / alpha
        assert fit_slope([512, 1024], bs) == pytest.approx(want, abs=0.05)

    def test_sup_exponent(self):
        # the largest weight sits at the region corner and grows like
        # n^(b1 + b2)
        b1, b2 = 0.3, 0.4
        model = cf.Farima(b1, b2)
        sups = []
        for n in (128, 256, 512):
            f = wt.build_weights(model, lat.cube(n, 2), 1.9, L1)
            sups.append(wt.diagnostics(f, 1.0)["sup_b"])
        assert fit_slope([256, 512], sups[1:]) == pytest.approx(
            b1 + b2, abs=0.05)


class TestGeometricFamily:
    def test_normalizer_exponent_alpha_dependence(self):
        # short-range family: B_n ~ C n^(2/alpha) for every alpha; the
        # geometric boundary correction decays like 1/n and bites harder
        # at small alpha, hence the larger grid
        model = cf.DoublyGeometric(0.4, 0.7)
        for alpha in (0.8, 1.5, 2.0):
            bs = []
            for n in (256, 512):
                f = wt.build_weights(model, lat.cube(n, 2), alpha, L1)
                bs.append(nz.solve_Bn(f, alpha, L1).B_n)
            assert fit_slope([256, 512], bs) == pytest.approx(2.0 / alpha,
                                                              abs=0.03)

    def test_constant_matches_rate_formula(self):
        theta, rho, alpha = 0.3, 0.6, 1.2
        f = wt.build_weights(cf.DoublyGeometric(theta, rho),
                             lat.cube(256, 2), alpha, L1)
        B = nz.solve_Bn(f, alpha, L1).B_n
        ref = 256.0 ** (2.0 / alpha) / ((1 - theta) * (1 - rho))
        assert B / ref == pytest.approx(1.0, abs=0.05)
