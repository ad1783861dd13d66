"""
Pseudo determinant three ways
=============================

The pseudo determinant multiplies the non-zero eigenvalues of a Hermitian
matrix.  Here it is computed from the spectrum, from the limit of
``det(A + delta I) / delta**(n - k)``, and from the sum of squared minors.
"""

# %%
import numpy as np

from pseudodet import pdet, pdet_limit, pdet_minor, pinv, pinv_berg

A = np.ones((2, 2))
print("Det(ones 2x2) =", pdet(A).value)

# %%
# The limit form approaches the same number as delta shrinks.  The error is
# roughly delta times the sum of reciprocal non-zero eigenvalues.
deltas = 10.0 ** -np.arange(1, 9)
for d, est in zip(deltas, pdet_limit(A, deltas)):
    print(f"delta={d:.0e}  estimate={est:.10f}")

# %%
# Squared k x k minors add up to Det(A)**2.  Squaring loses the sign, which
# only matters for indefinite matrices.
B = np.diag([2.0, -3.0, 0.0])
print("spectral:", pdet(B).value, " minors:", pdet_minor(B))

# %%
# The same minors, weighted by det**2, average to the pseudo inverse.
rng = np.random.default_rng(0)
U, _ = np.linalg.qr(rng.standard_normal((5, 5)))
C = (U * np.array([3.0, 1.5, -0.7, 0, 0])) @ U.T
print("max |pinv - pinv_berg| =", np.abs(pinv(C) - pinv_berg(C)).max())

# %%
# Pseudo determinants jump when the rank changes: Det(diag(1, j)) = j tends
# to 0 while Det(diag(1, 0)) = 1.
for j in 10.0 ** -np.arange(1, 7):
    print(f"j={j:.0e}  Det(diag(1, j))={pdet(np.diag([1.0, j])).value:.0e}")
print("Det(diag(1, 0)) =", pdet(np.diag([1.0, 0.0])).value)

# %%
try:
    import matplotlib.pyplot as plt
except ImportError:
    plt = None

if plt is not None:
    truth = pdet(C).value
    err = np.abs(pdet_limit(C, deltas) - truth) / abs(truth)
    fig, ax = plt.subplots()
    ax.loglog(deltas, err, "o-")
    ax.set_xlabel("delta")
    ax.set_ylabel("relative error of limit form")
    fig.savefig("limit_convergence.png", dpi=100)
