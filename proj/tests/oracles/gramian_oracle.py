# Continuum values for the free 1D wave on (0, 1) with the first Dirichlet mode
# e1 = sqrt(2) sin(pi x), observed for 0 < t < T = 1.76 on the union of the
# midpoint cells of the 200-cell lattice nodes in (7/10, 1): [0.7025, 0.9975].
# Displacement datum (e1, 0): w = e1 cos(pi t).  Velocity datum (0, e1): w = e1 sin(pi t) / pi.
import sympy as sp

t, x = sp.symbols("t x")
T = sp.Rational(176, 100)
e1 = sp.sqrt(2) * sp.sin(sp.pi * x)
space = sp.integrate(e1**2, (x, sp.Rational(281, 400), sp.Rational(399, 400)))
g_disp = sp.integrate(sp.cos(sp.pi * t) ** 2, (t, 0, T)) * space
g_vel = sp.integrate(sp.sin(sp.pi * t) ** 2, (t, 0, T)) * space / sp.pi**2
g_mix = sp.integrate(sp.cos(sp.pi * t) * sp.sin(sp.pi * t), (t, 0, T)) * space / sp.pi
print("G_disp", sp.N(g_disp, 17))
print("G_vel", sp.N(g_vel, 17))
print("G_mix", sp.N(g_mix, 17))
print("M_vel", sp.N(1 / sp.pi**2, 17))
print("hminus1_sin", sp.N(sp.sqrt(sp.Rational(1, 2)) / sp.pi, 17))
print("shifted_frequency_c4", sp.N(sp.sqrt(sp.pi**2 - 4), 17))
