"""
Covariance estimation for a degenerate Gaussian
===============================================

Samples from a normal distribution whose covariance has rank 2 in five
dimensions live on a plane.  With the range of the covariance fixed, the
maximum likelihood estimate is the residual matrix R/N projected onto that
range, and the projected gradient of the log-likelihood vanishes there.
"""

# %%
import numpy as np

from pseudodet import (
    GaussianModel,
    log_density,
    mle_covariance,
    projected_gradient_norm,
    residual_matrix,
    sample_degenerate,
)

rng = np.random.default_rng(7)
U, _ = np.linalg.qr(rng.standard_normal((5, 5)))
basis = U[:, :2]
Sigma = basis @ np.diag([3.0, 0.8]) @ basis.T
P = basis @ basis.T
model = GaussianModel(np.zeros(5), Sigma)
print(model)

# %%
# Density is finite on the plane and zero off it.
on = basis @ np.array([0.3, -1.0])
off = on + 0.01 * U[:, 4]
print("on support:", log_density(on, model))
print("off support:", log_density(off, model))

# %%
for N in (50, 500, 5000):
    X = sample_degenerate(model, N, seed=N)
    Shat = mle_covariance(X, np.zeros(5), P)
    R = residual_matrix(X, np.zeros(5))
    err = np.linalg.norm(Shat - Sigma) / np.linalg.norm(Sigma)
    print(f"N={N:5d}  relative error={err:.4f}  ||P G P||={projected_gradient_norm(Shat, R, N):.1e}")
