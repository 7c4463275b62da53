"""Ranking Gaussian vines by distance without knowing the true KL.

For Gaussian vines the KL divergence has a closed form, so we can check
whether dKL and sdKL order random vines the same way the exact value does.
This is a small version of the rank-correlation table (20 vines instead of 50).
"""

from __future__ import annotations

import numpy as np

from vinedist import GridSpec, dkl, random_gaussian_vine, sdkl, spearman
from vinedist.distance import gaussian_kl_analytic, gaussian_vine_corr
from vinedist.experiments import gaussian_dvine, rankcorr_seed, tau_matrix

for d in (3, 5, 7):
    ref = gaussian_dvine(np.sin(0.5 * np.pi * tau_matrix(d, 0.5)))
    sig_ref = gaussian_vine_corr(ref)
    exact, diag, single = [], [], []
    for r in range(1, 21):
        other = random_gaussian_vine(d, rankcorr_seed(d, r))
        exact.append(gaussian_kl_analytic(sig_ref, gaussian_vine_corr(other)))
        diag.append(dkl(ref, other, GridSpec(n=10)).value)
        single.append(sdkl(ref, other, GridSpec(n=10)).value)
    print(f"d={d}: Spearman with exact KL  dKL {spearman(exact, diag):.3f}  sdKL {spearman(exact, single):.3f}")
