"""Clustering Gauss nodes at the kernel singularity.

The memory kernel e_{0.6,0.6}(t) ~ t^-0.4 is singular at the integration end
point.  Plain Gauss-Legendre (r = 0) converges slowly on it; the one-sided map
t = t_r - L g^(1+r) with r = 3 smooths the integrand and restores fast
convergence.  The same holds when the evaluation point sits just past the
interval (t = 1.01), where the kernel is smooth but varies sharply.
"""

from colecole.driver import quadrature_study

for case, deg, n, err in quadrature_study(ns=(8, 16, 32, 64, 128)):
    print(f"{case:8s} T_{deg}  n={n:4d}   r=0: {err[0]:.2e}   r=3: {err[3]:.2e}")
