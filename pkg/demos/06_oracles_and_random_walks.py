"""Independent oracles: dense algebra, a lattice Green integral, random walks.

The Green function of Z³ at the origin is a classical integral, computed
here through its 1-D Bessel representation.  Truncated Green functions
approach it from below.  Random walks give a qualitative second opinion on
recurrence (critical) vs transience (subcritical).
"""

# %%
from sgl import assemble, default_family, dense_green, green_series, lattice, lattice_green_quadrature, rw_return_estimate, solve_green

# %%
G3 = lattice_green_quadrature(3, tol=1e-10)
print(f"G_Z3(0, 0) = {G3:.10f}")
fam = default_family(lattice(3), ball="l1")
g = green_series(fam, (0, 0, 0), (0, 0, 0), 15, levels=[5, 10, 15])
for n, v in zip(g.levels, g.values):
    print(f"ℓ¹ ball radius {n:2d}: G_n(0,0) = {v:.6f}  ({100 * (G3 - v) / G3:.2f}% below)")

# %%
sys_ = assemble(default_family(lattice(2)), 8)
diff = abs(solve_green(sys_, (0, 0)).values - dense_green(sys_.region, (0, 0)).values).max()
print("sparse solver vs dense oracle on a Z² ball:", f"{diff:.1e}")

# %% [markdown]
# Expected number of returns to the origin up to a horizon.

# %%
horizons = [100, 1000, 10000]
for d in (2, 3):
    est = rw_return_estimate(lattice(d), (0,) * d, horizons, trials=2000, seed=1)
    print(f"Z^{d}:", ", ".join(f"{h}: {e:.3f} ± {hw:.3f}" for h, e, hw in zip(horizons, est.estimates, est.half_widths)))
