"""Ground states, Hardy weights, and positive vs null criticality.

For a critical form the positive harmonic function is unique up to scaling.
We extract it from the bottom Dirichlet eigenvector of large truncations,
normalized at the anchor.  A weight w is a Hardy weight if h − w ≥ 0, which
is checked level by level through a generalized eigenvalue problem.
"""

# %%
from sgl import classify, default_family, ground_state, halfline, halfline_dirichlet, lattice, weight_criticality, weight_nonneg_series

# %%
for name, fam, o, N in [("half-line", default_family(halfline()), 0, 200), ("Z", default_family(lattice(1)), 0, 120)]:
    rep = classify(fam, o, N)
    gs = ground_state(fam, o, N, window_radius=5, report=rep)
    print(f"{name}: {gs.label}; window values", [round(gs.psi(v), 4) for v in gs.window])

# %% [markdown]
# The eigenvector profile is sin-shaped near the anchor, so its distance
# from 1 on a window of radius k shrinks like (k/N)²; the Green column only
# shrinks like k/N.

# %%
fam = default_family(halfline())
for method in ("green", "eigen"):
    gs = ground_state(fam, 0, 200, window_radius=10, method=method)
    print(f"{method:5s}: max |ψ − 1| on {{0..10}} = {max(abs(gs.psi(k) - 1) for k in range(11)):.2e}")

# %% [markdown]
# Hardy's inequality on N: w(n) = 1/(4n²) is admissible, 1/(2n²) is not.

# %%
fam = default_family(halfline_dirichlet())
for c in (0.25, 0.5):
    s = weight_nonneg_series(fam, lambda n: c / n**2, 200, levels=[10, 50, 100, 200])
    print(f"w = {c}/n²:  inf h/‖·‖²_w at N = 10, 50, 100, 200:", [round(float(v), 4) for v in s.values], " first level below 1:", s.meta["first_violation"])

# %% [markdown]
# With ψ ≡ 1 on the half-line, Σ ψ² w is finite for w = 2^{-n} and infinite
# for w = 1.

# %%
one = lambda x: 1.0  # noqa: E731
fam = default_family(halfline())
print("w = 1:     ", weight_criticality(fam, one, one, 200).verdict)
rep = weight_criticality(fam, lambda n: 2.0**-n, one, 60)
print("w = 2^{-n}:", rep.verdict, " S_60 =", float(rep.evidence[0].values[-1]))
