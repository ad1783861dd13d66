"""
The canonical gradient
======================

Along directions that keep the kernel fixed, the derivative of the pseudo
determinant is any matrix G with ``A G = Det(A) A A^+`` and
``G A = Det(A) A^+ A``.  Many matrices qualify; ``can(A) = Det(A) A^+`` is
the one whose kernel matches that of A.
"""

# %%
import numpy as np

from pseudodet import (
    DirectionalProbe,
    canonical_gradient,
    check_class_equations,
    directional_derivative,
    fd_directional_derivative,
    verify_uniqueness,
)

A = np.ones((2, 2))
b = canonical_gradient(A)
print("Det =", b.det)
print("can(A) =\n", b.can)

# %%
# Both the identity and A/2 solve the class equations, but only A/2 shares
# the kernel of A.
for G in (np.eye(2), 0.5 * A):
    rep = check_class_equations(A, G, 1e-10)
    print(G.tolist(), "class equations:", rep.passed, " unique member:", verify_uniqueness(A, G))

# %%
# Weighted two-node Laplacian: the canonical gradient forgets the weight.
for c in (0.5, 1.0, 3.0):
    L = c * np.array([[1.0, -1.0], [-1.0, 1.0]])
    print(f"c={c}: Det={canonical_gradient(L).det}, can=\n{canonical_gradient(L).can}")

# %%
# Check the derivative against central differences in a kernel-preserving
# direction.
rng = np.random.default_rng(1)
U, _ = np.linalg.qr(rng.standard_normal((4, 4)))
A4 = (U * np.array([2.0, -1.0, 0.5, 0.0])) @ U.T
M = rng.standard_normal((3, 3))
B = U[:, :3] @ (M + M.T) @ U[:, :3].T
print("analytic:", directional_derivative(A4, B))
print("central FD:", fd_directional_derivative(DirectionalProbe(B, 1e-5), A4))
