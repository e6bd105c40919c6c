"""Criticality from the capacity of a point.

G_n(x, x) is the Green function of the Dirichlet truncation to K_n.  It
increases in n; the capacity 1/G_n(x, x) decreases to 0 exactly when the
form is critical.  No finite computation proves either verdict, so the
classifier reports evidence and a verdict from explicit thresholds.
"""

# %%
from sgl import classify, default_family, halfline, halfline_dirichlet, lattice, minimal_green, null_sequence, tree

# %%
cases = {
    "half-line N0": (default_family(halfline()), 0, 200),
    "Dirichlet half-line N": (default_family(halfline_dirichlet()), 1, 200),
    "Z": (default_family(lattice(1)), 0, 200),
    "Z^2": (default_family(lattice(2)), (0, 0), 30),
    "Z^3": (default_family(lattice(3)), (0, 0, 0), 12),
    "binary tree": (default_family(tree(2)), (), 12),
}
for name, (fam, x, N) in cases.items():
    rep = classify(fam, x, N)
    cap = rep.series(f"cap_n({x})")
    print(f"{name:22s} cap_1 = {cap.values[0]:.4f}  cap_N = {cap.values[-1]:.4f}  -> {rep.verdict} ({rep.details['reason']})")

print()
print(rep.caveat)

# %% [markdown]
# On Z the normalized Green columns e_n = G_n(0, ·)/G_n(0, 0) form a
# null-sequence: e_n(0) = 1 and h(e_n) = 2/(n+1) → 0.

# %%
for e, energy in null_sequence(default_family(lattice(1)), 0, 64, levels=[1, 4, 16, 64]):
    print(f"|supp| = {e.region.size:4d}   h(e_n) = {energy:.6f}")

# %% [markdown]
# In the subcritical case the limit G is the minimal positive Green function.
# On the Dirichlet half-line G(1, n) = 1 for every n ≥ 1; level N gives
# 1 − n/(N+1).

# %%
mg = minimal_green(default_family(halfline_dirichlet()), 1, 400)
print("G(1, 1..5) ≈", [round(mg.green(n), 4) for n in range(1, 6)], " residual", f"{mg.residual:.1e}")
