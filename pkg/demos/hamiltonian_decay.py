"""Damped oscillator with fractional memory.

    u'' + 4u = 3 int_0^t e_{0.6,0.6}(-1.5 (t-s)^0.6) u(s) ds,  u(0) = 0, u'(0) = 2

Since c - d/lam = 2 >= 0 and u(0) = 0, the quantity H = u'^2 + 2u^2 never
rises above its starting value 4, and the phase point (u, u') spirals into
the origin.  Starting instead from u(0) = 2, u'(0) = 0 the same quantity
first grows: the bound needs a zero initial displacement.
"""

import numpy as np

from colecole.ide.march import IDEProblem, TimeMesh, hamiltonian, march


def trace(u0, u1):
    prob = IDEProblem(4.0, 3.0, 1.5, 0.6, u0, u1, 20.0)
    sol = march(prob, TimeMesh(20.0, 20, 20))
    t = sol.dense_times(16)
    return t, sol.q(t)[0], sol.p(t)[0], hamiltonian(prob, sol, t)[0]


t, q, p, H = trace(0.0, 2.0)
print("   t        u          u'         H")
for i in range(0, t.size, 32):
    print(f"{t[i]:5.1f}  {q[i]:+.6f}  {p[i]:+.6f}  {H[i]:.6f}")
print(f"max H - H(0) = {H.max() - H[0]:.2e}; final phase radius is {np.hypot(q[-1], p[-1]) / 2:.3f} of the initial")

_, _, _, H2 = trace(2.0, 0.0)
print(f"swapped data: H(0) = {H2[0]:.3f}, max H = {H2.max():.3f}")
