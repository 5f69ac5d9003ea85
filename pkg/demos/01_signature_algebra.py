# %% [markdown]
# # Level-2 signature algebra
#
# Group elements (1, u, b) multiply by adding level-1 parts and
# accumulating the cross term u_a (x) u_b on level 2.  Increments of a
# path of group values are automatically multiplicative (Chen's
# relation), which this script demonstrates numerically.

# %%
import numpy as np

from roughpaths import GroupElement2, hom_norm, identity, increment, inv, mul

rng = np.random.default_rng(0)
m = 3

a = GroupElement2(rng.normal(size=m), rng.normal(size=(m, m)))
b = GroupElement2(rng.normal(size=m), rng.normal(size=(m, m)))

print("level1 of a*b  :", mul(a, b).level1)
print("additive check :", np.allclose(mul(a, b).level1, a.level1 + b.level1))

# %% the inverse has the closed form (1, -u, u(x)u - b)
ai = inv(a)
unit = mul(a, ai)
print("a * a^-1 level1:", np.max(np.abs(unit.level1)))
print("a * a^-1 level2:", np.max(np.abs(unit.level2)))

# %% Chen reconstruction: increments over adjacent spans glue exactly
x0, x1, x2 = (GroupElement2(rng.normal(size=m), rng.normal(size=(m, m)))
              for _ in range(3))
whole = increment(x0, x2)
glued = mul(increment(x0, x1), increment(x1, x2))
print("Chen defect    :", max(np.max(np.abs(whole.level1 - glued.level1)),
                              np.max(np.abs(whole.level2 - glued.level2))))

# %% the homogeneous norm scales linearly under dilation
g = GroupElement2(rng.normal(size=m), rng.normal(size=(m, m)))
for lam in (1.0, 2.0, 4.0):
    dil = GroupElement2(lam * g.level1, lam * lam * g.level2)
    print(f"hom_norm at lam={lam:g}: {hom_norm(dil):.6f} "
          f"(= {lam:g} * {hom_norm(g):.6f})")

print("identity norm  :", hom_norm(identity(m)))
