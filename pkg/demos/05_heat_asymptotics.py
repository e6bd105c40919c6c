"""Heat kernels on truncations and their long-time behavior.

p_t(x, y) = e^{−tH} 1_x (y) decays like e^{−λ₀ t}, and e^{λ₀ t} p_t(x, y)
converges to Ψ(x)Ψ(y) with Ψ the normalized bottom eigenvector.  Near the
bottom, (−λ) G_λ(x, x₀) tends to φ(x)φ(x₀) in the critical case and to 0
otherwise.
"""

# %%
import math

from sgl import DirichletSystem, from_edges, heat_gs_limit, heat_kernel, lambda_green_limit, lattice, long_time_rate, materialize

# %%
seg = DirichletSystem(materialize(lattice(1), range(1, 10)))
for t in (0, 1, 10, 100):
    print(f"t = {t:3d}   p_t(5, 5) = {heat_kernel(seg, t, 5, 5):.6e}")

rate = long_time_rate(seg, 5, 5, [100, 150, 200])
print(f"rate estimate {rate.estimate:.8f}   λ₀ = {rate.lambda0:.8f}   closed form {4 * math.sin(math.pi / 20) ** 2:.8f}")
lim = heat_gs_limit(seg, 2, 7)
print(f"e^(λ₀t) p_t(2, 7) → {lim.value:.10f} (projection)   {lim.time_stepped:.10f} (time stepping)")

# %% [markdown]
# The 2-vertex graph is a finite critical form: its bottom eigenvalue is 0.

# %%
pair = DirichletSystem(materialize(from_edges([1, 2], [(1, 2, 1.0)]), [1, 2]))
for w, label in ((1.0, "w = 1"), ({1: 1.0, 2: 4.0}.get, "w = (1, 4)")):
    res = lambda_green_limit(pair, w, 1, 1)
    print(f"{label:10s} (−λ)G_λ at λ = −2^-1, −2^-10, −2^-20:", [round(float(res.values[k]), 7) for k in (0, 9, 19)], " limit", round(res.limit, 12))
