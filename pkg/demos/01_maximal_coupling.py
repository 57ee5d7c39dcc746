"""Maximal couplings of discrete laws, and the rejection sampler for path laws."""
import numpy as np

from couplab import measures as ms
from couplab.dynamics import log_likelihood_ratio
from couplab.sampling import maximal_coupling_sample

# two laws on {0, ..., 5}
mu1 = ms.probability(range(6), [0.30, 0.25, 0.20, 0.15, 0.10, 0.00])
mu2 = ms.probability(range(6), [0.05, 0.10, 0.15, 0.20, 0.25, 0.25])
tv = ms.tv_distance(mu1, mu2)
print(f"TV(mu1, mu2) = {tv:.4f}")

# the maximal coupling puts the meet on the diagonal and spreads the rest
mc = ms.maximal_coupling_exact(mu1, mu2)
print("P(Z1 = Z2) =", round(mc.prob_equal(), 12), "   1 - TV =", round(1 - tv, 12))
print(np.round(mc.joint, 3))

# coupling the images under f0 = parity, with a pushforward coupling
parity = lambda x: x % 2
pc = ms.pushforward_coupling(mu1, mu2, parity)
nu1, nu2 = ms.pushforward(mu1, parity), ms.pushforward(mu2, parity)
print("image P(equal) =", round(pc.pushforward(parity).prob_equal(), 12),
      " vs 1 - TV of images =", round(1 - ms.tv_distance(nu1, nu2), 12))

# for continuous laws we only sample: Brownian increments with and without a drift h
n, dt, h = 8, 0.1, 1.0


def draw1(rng, idx):
    return {"dW": np.sqrt(dt) * rng.standard_normal((len(idx), n))}


def draw2(rng, idx):
    return {"dW": h * dt + np.sqrt(dt) * rng.standard_normal((len(idx), n))}


def log_ratio(p, idx):  # log d(mu2)/d(mu1)
    return log_likelihood_ratio(np.full(p["dW"].shape + (1,), h), p["dW"][..., None], dt)


z1, z2, met = maximal_coupling_sample(draw1, log_ratio, draw2, np.random.default_rng(0), size=20_000)
from scipy.stats import norm
exact = 2 * norm.sf(h * np.sqrt(n * dt) / 2)
print(f"sampled P(Z1 = Z2) = {met.mean():.4f}   exact = {exact:.4f}")
