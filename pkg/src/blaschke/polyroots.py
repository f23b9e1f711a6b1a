"""Simultaneous polynomial root finding (Aberth-Ehrlich iteration).

Coefficients are ordered highest degree first, as in ``numpy.polyval``.
"""

import math

import numpy as np

from .errors import SolverDivergence


def _horner(coeffs, z):
    p = coeffs[0]
    dp = 0j
    for c in coeffs[1:]:
        dp = dp * z + p
        p = p * z + c
    return p, dp


def aberth(coeffs, tol=1e-14, max_iter=500):
    """Return all roots of the polynomial with the given coefficients.

    Starting points sit on a circle of Cauchy-bound radius with an irrational
    angular offset so that symmetric polynomials do not stall the iteration.
    Raises SolverDivergence if the corrections have not dropped below ``tol``
    (relative to the root modulus) within ``max_iter`` sweeps.
    """
    c = np.asarray(coeffs, dtype=complex)
    nz = np.flatnonzero(c)
    if nz.size == 0:
        raise ValueError("zero polynomial")
    c = c[nz[0]:]
    n = c.size - 1
    if n == 0:
        return np.empty(0, dtype=complex)
    c = c / c[0]
    radius = 1.0 + max(abs(x) for x in c[1:])
    z = np.array([radius * complex(math.cos(2 * math.pi * k / n + 0.4),
                                   math.sin(2 * math.pi * k / n + 0.4))
                  for k in range(n)])
    coeff_list = list(c)

    for _ in range(max_iter):
        worst = 0.0
        for i in range(n):
            zi = z[i]
            p, dp = _horner(coeff_list, zi)
            if p == 0:
                continue
            ratio = p / dp if dp != 0 else complex(tol, 0)
            s = 0j
            for j in range(n):
                if j != i:
                    diff = zi - z[j]
                    if diff != 0:
                        s += 1.0 / diff
            denom = 1.0 - ratio * s
            w = ratio / denom if denom != 0 else ratio
            z[i] = zi - w
            worst = max(worst, abs(w) / max(1.0, abs(z[i])))
        if worst < tol:
            break
    else:
        # clustered roots converge slowly; accept a tiny backward error
        mags = np.abs(c)
        for zi in z:
            p, _ = _horner(coeff_list, zi)
            scale = float(np.polyval(mags, abs(zi)))
            if not abs(p) <= 1e-10 * scale:
                raise SolverDivergence(
                    f"Aberth iteration did not converge in {max_iter} sweeps")

    # a couple of plain Newton steps to polish
    for i in range(n):
        for _ in range(3):
            p, dp = _horner(coeff_list, z[i])
            if dp == 0:
                break
            z[i] -= p / dp
    return z
