"""Tour of the Faddeev Green function: values, symmetry, scaling and decay.

Run with ``python3 demos/green_function_tour.py``.
"""
import numpy as np

from dbar_recon.greens import envelope, faddeev_G, faddeev_g

E = 1.0
lam = 2.5 * np.exp(0.7j)

# G is unchanged when lambda is replaced by -1/conj(lambda)
z = 0.4 - 0.9j
print("G(z, lam)            =", faddeev_G(z, lam, E))
print("G(z, -1/conj(lam))   =", faddeev_G(z, -1 / np.conj(lam), E))

# energy enters only through |z| sqrt(E)
for e in (0.5, 2.0, 8.0):
    print(f"E={e:4.1f}  g(z)={faddeev_g(z, lam, e):.6f}  g(z sqrt(E), E=1)={faddeev_g(z * np.sqrt(e), lam, 1.0):.6f}")

# decay: |g| against f(tau), tau = |z| sqrt(E) (|lam| + 1/|lam|)
print("\n   tau      |g|    |g|/f(tau)")
for tau in (0.01, 0.1, 0.5, 2.0, 10.0, 50.0):
    zs = tau / (abs(lam) + 1 / abs(lam)) * np.exp(1j * np.linspace(0, 2 * np.pi, 64, endpoint=False))
    g = np.max(np.abs(faddeev_g(zs, lam, E)))
    print(f"{tau:7.2f}  {g:8.4f}  {g / float(envelope(tau)):8.4f}")
