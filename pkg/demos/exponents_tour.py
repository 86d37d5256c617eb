# %% [markdown]
# Exponent selection with exact rationals.
# Everything here is Fraction arithmetic, so equalities are exact.

# %%
from fractions import Fraction as F

from dispersive_lab.exponents import (
    admissible_enumerate,
    critical_index,
    in_class_S,
    select_schrodinger_exponents,
    select_wave_exponents,
)

# %%
# critical regularity for the cubic equation in three dimensions
print("s_c(3, 3) =", critical_index(3, 3))

# %%
# Schrodinger selection: the window for eps and the triple it produces
sel = select_schrodinger_exponents(3, 1, 3)
print("window", sel.window, "eps", sel.epsilon)
print("triple", sel.triple, "beta", sel.beta, "admissible", in_class_S(3, 2, sel.triple))

# %%
# wave selection with s' = 1/2 and a pinned eps
w = select_wave_exponents(2, F(1, 2), 4, F(5, 4))
print("wave triple", w.triple, "beta", w.beta)

# %%
# a small slice of the admissible class
for t in admissible_enumerate(3, 2, "S", 4)[:8]:
    print(t)
