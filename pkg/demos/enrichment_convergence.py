"""Why the first interval gets extra singular functions.

The manufactured solution u(t) = t^2.6 + t^4.2 + sign(1-t)(t-1)^5 has powers
that a polynomial can only approximate slowly near t = 0.  Extracting the
singular powers below tau lets the remaining polynomial part converge
spectrally: tau = 2 extracts nothing, tau = 3 removes t^2.6 and tau = 5
removes both.
"""

from colecole.driver import convergence_table

Ns, errs, slopes = convergence_table(alpha=0.6, Ns=(8, 12, 16, 20, 24), taus=(2, 3, 5))
print("  N " + "".join(f"   tau={t:<6g}" for t in errs))
for i, n in enumerate(Ns):
    print(f"{n:3d} " + "".join(f"  {errs[t][i]:.3e}" for t in errs))
print("log-log slopes: " + ", ".join(f"tau={t:g}: {s:.2f}" for t, s in slopes.items()))
