"""Bottom of the spectrum, positive supersolutions, and Harnack constants.

λ₀ is the limit of the bottom Dirichlet eigenvalues λ_min(H_{K_n}); removing
a finite set and repeating gives a probe of the essential spectrum.  Any
λ < λ₀ admits a positive supersolution of H − λ, and on a connected finite
set the path-product Harnack constant bounds max u / min u for all of them.
"""

# %%
import math

from sgl import (
    HarnackInstance,
    ap_witness,
    default_family,
    halfline,
    harnack_constant,
    lambda0_ess_probe,
    lambda0_series,
    lattice,
)

# %%
Z = default_family(lattice(1))
s = lambda0_series(Z, N=64, levels=[0, 1, 2, 4, 8, 16, 32, 64])
for n, v in zip(s.levels, s.values):
    print(f"n = {n:3d}   λ_min(H_K_n) = {v:.6f}   closed form {4 * math.sin(math.pi / (4 * n + 4)) ** 2:.6f}")
print("extrapolant:", s.meta["extrapolant"], "|", s.meta["note"])

# %% [markdown]
# A potential bump at the origin raises λ_min of small boxes, but the
# essential spectrum sees only what happens far away.

# %%
bump = default_family(lattice(1, q={0: 5.0}))
print("with bump, λ_min(K_4):", round(lambda0_series(bump, N=4).values[-1], 4))
probe = lambda0_ess_probe(bump, hole_levels=[0, 2], N=40)
print("essential probe estimate:", round(probe.estimate, 6))

# %% [markdown]
# Allegretto-Piepenbrink witness: for λ = −1/2 < λ₀ = 0 on Z the resolvent
# of the indicator of 0 is positive and decays geometrically.

# %%
u, rep = ap_witness(Z, None, -0.5, 0, 30)
print("min value", f"{rep.min_value:.3e}", " passed:", rep.passed, " u(1)/u(0) =", round(u(1) / u(0), 6))

# %% [markdown]
# Harnack constants on small windows of the half-line.  Raising f lowers
# d = deg + q − f and with it the constant, until d hits 0 and no finite
# constant is certified.

# %%
H = halfline()
for f in (0.0, 0.5, 1.0, 1.5, 2.0):
    print(f"f = {f}: C = {harnack_constant(HarnackInstance(H, [1, 2, 3, 4], f=f))}")
