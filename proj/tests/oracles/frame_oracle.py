# Frame quantities of the weighted identity at one point, computed symbolically.
# Setting: n = 2, h = diag(2, 3), d = |x - x0|^2 with x0 = (-0.1, -0.2),
# phi = d - alpha (t - T/2)^2 - alpha (s - T/2)^2, ell = lambda phi,
# v = exp(ell) u, Psi = -lambda sum_jk (h^{jk} d_j)_k + 2 lambda (1 - alpha).
# u = 1 + t s - 0.5 x1^2 + 0.3 x2 t^2 + x1 x2 s.
import sympy as sp

t, s, x1, x2 = sp.symbols("t s x1 x2")
X = (x1, x2)
lam, alpha, T = sp.Rational(3, 2), sp.Rational(9, 10), sp.Rational(8, 5)
H = [[2, 0], [0, 3]]
x0 = (sp.Rational(-1, 10), sp.Rational(-2, 10))
d = (x1 - x0[0]) ** 2 + (x2 - x0[1]) ** 2
phi = d - alpha * (t - T / 2) ** 2 - alpha * (s - T / 2) ** 2
l = lam * phi
u = 1 + t * s - sp.Rational(1, 2) * x1**2 + sp.Rational(3, 10) * x2 * t**2 + x1 * x2 * s
v = sp.exp(l) * u
D = sp.diff
n = 2
S = lambda f: sum(f(j, k) for j in range(n) for k in range(n))
Psi = -lam * S(lambda j, k: D(H[j][k] * D(d, X[j]), X[k])) + 2 * lam * (1 - alpha)
lx = [D(l, X[j]) for j in range(n)]
vx = [D(v, X[j]) for j in range(n)]
lt, ls, vt, vs = D(l, t), D(l, s), D(v, t), D(v, s)
divhl = S(lambda j, k: D(H[j][k] * lx[j], X[k]))
A = -lt**2 - ls**2 + S(lambda j, k: H[j][k] * lx[j] * lx[k]) + D(l, t, 2) + D(l, s, 2) - divhl - Psi
I1 = D(v, t, 2) + D(v, s, 2) - S(lambda j, k: D(H[j][k] * vx[j], X[k])) - A * v
I2 = -2 * lt * vt - 2 * ls * vs + 2 * S(lambda j, k: H[j][k] * lx[j] * vx[k]) - Psi * v
B = 2 * (A * Psi - D(A * lt, t) - D(A * ls, s) + S(lambda j, k: D(A * H[j][k] * lx[j], X[k])))
hv = S(lambda j, k: H[j][k] * vx[j] * vx[k])
M = lt * (vt**2 - vs**2 + hv) - 2 * S(lambda j, k: H[j][k] * lx[j] * vx[k]) * vt + 2 * ls * vs * vt + Psi * v * vt - A * lt * v**2
N = ls * (vs**2 - vt**2 + hv) - 2 * S(lambda j, k: H[j][k] * lx[j] * vx[k]) * vs + 2 * lt * vs * vt + Psi * v * vs - A * ls * v**2
Pu = D(u, t, 2) + D(u, s, 2) - S(lambda j, k: D(H[j][k] * D(u, X[j]), X[k]))

z = {t: sp.Rational(3, 10), s: sp.Rational(11, 10), x1: sp.Rational(4, 10), x2: sp.Rational(7, 10)}
for name, e in [("v", v), ("psi", Psi), ("A", A), ("B", B), ("M", M), ("N", N), ("I1", I1), ("I2", I2), ("Pu", Pu)]:
    print(f"{name} {sp.N(e.subs(z), 17)}")
