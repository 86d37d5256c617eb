# %% [markdown]
# Decay of the frequency-localized kernel.
# Small t sits on a plateau at the origin; the predicted order shows up
# once the stationary set moves out (t of a few tens and beyond).

# %%
import numpy as np

from dispersive_lab.kernel import kernel_radial, sup_kernel

# %%
# radial profile at a few times, sigma = 2, N = 3
r = np.linspace(0, 60, 7)
for t in (1.0, 10.0):
    print(t, np.round(np.abs(kernel_radial(r, t, 2, 3)), 6))

# %%
# t^beta sup|K| should flatten out
for sigma in (2, 1):
    beta = (3 - 2 + sigma) / 2
    for t in (1.0, 10.0, 100.0, 400.0):
        v = sup_kernel(t, sigma, 3, per_unit=2 if t >= 100 else 20)
        print(f"sigma={sigma} t={t:6.1f} sup={v:.3e} t^beta*sup={v * t**beta:.4f}")
