# %% [markdown]
# # The unitary transformation, checked numerically
#
# Write `ell = sqrt(dG/dH)` with `G(t) = 1 - exp(-t)`.  The composed operator
# `K_hat = K[beta_h, ell*beta_g~] K[1, ell]` is a product of two reflections in
# L2(H).  It sends `ell` to `1` and `ell*beta_g` to `beta_h` while preserving
# inner products.  These properties are what make the transformed process
# parameter free.

# %%
import numpy as np

from tailcheck import make_score_basis
from tailcheck.l2h_geometry import beta_h, ell, ell_beta_g, inner_product_h
from tailcheck.quadrature import QuadratureEngine
from tailcheck.unitary_transform import apply_k_hat, build_transform, default_grid, phi_tilde

theta = 3.0
basis = make_score_basis(theta)
print(f"||beta_h||^2 = {basis.ip_bh_bh:.12f}")
print(f"||ell||^2    = {basis.ip_ell_ell:.12f}")
print(f"<1, ell>     = {basis.ip_one_ell:.12f}")

# %% [markdown]
# Apply `K_hat` by nested quadrature and evaluate the images pointwise.

# %%
engine = QuadratureEngine(abs_tolerance=1e-11)
k_ell = apply_k_hat(basis, lambda t: ell(theta, t), engine)
k_lbg = apply_k_hat(basis, lambda t: ell_beta_g(theta, t), engine)
t = np.linspace(0, 50, 11)
print("K_hat ell          :", np.round(k_ell(t), 10))
print("K_hat ell*beta_g - beta_h:", np.abs(k_lbg(t) - beta_h(theta, t)).max())

# %% [markdown]
# The cached form of the transformed indicators `phi~_x` has norm
# `G(x) = 1 - exp(-x)`, the variance of a standard G-Brownian motion at x.

# %%
grid = default_grid()
coeffs = build_transform(basis, grid)
for x in (0.5, 1.0, 2.0, 4.0, 8.0):
    f = lambda s, x=x: phi_tilde(coeffs, x, s)
    norm = inner_product_h(f, f, theta, engine.with_splits([x]))
    print(f"x={x:3.1f}  <phi~, phi~> = {norm:.10f}   1 - exp(-x) = {1 - np.exp(-x):.10f}")
