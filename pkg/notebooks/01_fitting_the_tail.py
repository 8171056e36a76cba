# %% [markdown]
# # Fitting a Pareto-type tail
#
# We reduce a sample to its exceedances over a threshold `x0`, rescale them as
# `T = X/x0 - 1`, and fit the exponent of `H(t) = 1 - (1+t)**-theta` by maximum
# likelihood.  For this model the MLE is the Hill estimator.

# %%
import numpy as np

from tailcheck import fit_exponent_mle, hill_estimator, make_tail_sample
from tailcheck.simulation import sample_cauchy, sample_pareto

rng = np.random.default_rng(2024)

# %% [markdown]
# A standard Pareto sample with exponent 2; about `n / x0**2` draws exceed `x0`.

# %%
x = sample_pareto(2.0, 5000, rng)
tail = make_tail_sample(x, x0=5.0)
print(f"n={tail.n}  m={tail.m}  theta_hat={fit_exponent_mle(tail):.3f}")
print("Hill estimate (same number):", hill_estimator(x, 5.0))

# %% [markdown]
# The Cauchy tail is regularly varying with exponent 1, so above a high enough
# threshold the fitted exponent is close to 1.

# %%
c = sample_cauchy(20000, rng)
for x0 in (3.0, 10.0, 30.0):
    s = make_tail_sample(c, x0, min_tail=None)
    print(f"x0={x0:5.1f}  m={s.m:5d}  theta_hat={fit_exponent_mle(s):.3f}")

# %% [markdown]
# Consistency: the mean absolute error shrinks like `1/sqrt(m)`.

# %%
for n in (1000, 4000, 16000):
    est = [fit_exponent_mle(make_tail_sample(sample_pareto(2.0, n, rng), 5.0, min_tail=None)) for _ in range(200)]
    print(f"n={n:6d}  mean |theta_hat - 2| = {np.mean(np.abs(np.array(est) - 2)):.4f}")
