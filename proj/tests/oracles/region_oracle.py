# Node counts and measures of the observation regions for the 1D reference
# setting, in exact rational arithmetic.
# Omega = (0, 1) with 200 cells, d = (x + 1/10)^2, observed end x = 1,
# omega = {1 - x < 3/10}, omega0 = {1 - x < 1/10}, T = 11/10 * 8/5,
# 200 midpoint time cells, slab |t - T/2| < T/4.
# K = (slab x omega0) u ((omega \ omega0) n {d > (t - T/2)^2});
# K2 = (0, T) x omega cut down to (x + 1/10)^2 > t^2.
from fractions import Fraction as F

nx, nt = 200, 200
T = F(11, 10) * F(8, 5)
xs = [F(k, nx) for k in range(1, nx)]
ts = [(i + F(1, 2)) * T / nt for i in range(nt)]
omega = [x for x in xs if 1 - x < F(3, 10)]
omega0 = [x for x in xs if 1 - x < F(1, 10)]
K = K1 = K2 = 0
for t in ts:
    tau = t - T / 2
    for x in omega:
        K1 += 1
        if (x + F(1, 10)) ** 2 > t * t:
            K2 += 1
        if x in omega0:
            K += abs(tau) < T / 4
        else:
            K += (x + F(1, 10)) ** 2 > tau * tau
cell = T / nt / nx
print("omega", len(omega), "omega0", len(omega0))
for name, c in [("K", K), ("K1", K1), ("K2", K2)]:
    print(name, c, float(c * cell))
print("ratio", float(F(K, K1)))
