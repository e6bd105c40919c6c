"""Graphs, exhaustions, and the energy form.

A graph is a presentation: a neighbor function, a potential q and a measure
m.  Finite pieces are materialized on demand along an exhaustion K_0 ⊂ K_1
⊂ ...; everything downstream works on those finite regions.
"""

# %%
import numpy as np

from sgl import (
    RegionFunction,
    apply_H,
    default_family,
    extended_form,
    gst_form,
    gst_identity_residual,
    halfline,
    lattice,
    quad_form,
    validate,
    weighted_degree,
)

# %% [markdown]
# Generators give infinite graphs: Z^d, half-lines, regular trees.  A region
# remembers which edges leave it, so the Dirichlet energy counts them.

# %%
Z3 = lattice(3)
fam = default_family(Z3, ball="l1")
K1 = fam.region(1)
print("deg(0) on Z^3:", weighted_degree(Z3, (0, 0, 0)))
print("|K_1| =", K1.size, " boundary edges:", len(K1.boundary))
print("validation:", validate(Z3, fam.vertex_set(2)).summary())

# %% [markdown]
# The form h(φ) = ½ Σ b (φ(x) − φ(y))² + Σ q φ² and the operator H = L + q are
# tied by the Green formula h(φ, ψ) = Σ (Hφ) ψ.

# %%
Z = lattice(1)
reg = default_family(Z).region(4)
rng = np.random.default_rng(0)
phi = RegionFunction(reg, rng.standard_normal(reg.size))
psi = RegionFunction(reg, rng.standard_normal(reg.size))
lhs = quad_form(Z, phi, psi)
rhs = sum(apply_H(Z, phi, x) * psi(x) for x in reg.vertices)
print(f"h(φ, ψ) = {lhs:.12f}   Σ Hφ·ψ = {rhs:.12f}")

# %% [markdown]
# Ground state transform: if Hv = f v with v > 0 then
# h(φ) = h_v(φ / v) + Σ f φ².  On Z, v(k) = 2^k solves Hv = -½ v.

# %%
v = lambda k: 2.0**k  # noqa: E731
print("residual of the identity:", gst_identity_residual(Z, v, lambda k: -0.5, phi))
print("h_v(1_K) equals the cut energy of v:", gst_form(Z, v, RegionFunction(reg, np.ones(reg.size))))

# %% [markdown]
# The extended form evaluated on a truncation: for v = 1 on the half-line the
# ramp g_N = (1 − n/N)_+ has energy 1/N, a null-sequence in disguise.

# %%
H = halfline()
for N in (5, 50, 500):
    r = default_family(H).region(N)
    g = RegionFunction.from_callable(r, lambda n: max(0.0, 1 - n / N))
    print(f"N={N:4d}  extended form = {extended_form(H, lambda n: 1.0, g).total:.6f}")
