import numpy as np

import dicke3 as d3
from dicke3.model import coupling_name


def random_model(
    rng,
    cfg,
    na=2,
    nmax=12,
    mu_lo=0.05,
    mu_hi=2.0,
    omega_span=(0.0, 2.0),
    Omega=1.0,
):
    """Valid random model: sorted frequencies, couplings only on allowed pairs."""
    om = np.sort(rng.uniform(*omega_span, 3))
    mus = {"mu12": 0.0, "mu13": 0.0, "mu23": 0.0}
    pair_a, pair_b = cfg.allowed_pairs
    mus[coupling_name(pair_a)] = float(rng.uniform(mu_lo, mu_hi))
    mus[coupling_name(pair_b)] = float(rng.uniform(mu_lo, mu_hi))
    return d3.ModelConfig(
        cfg,
        float(om[0]),
        float(om[1]),
        float(om[2]),
        **mus,
        na=na,
        nmax=nmax,
        Omega=Omega,
    )
