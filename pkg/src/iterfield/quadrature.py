"""One-dimensional adaptive quadrature used for potentials.

Thin wrapper over scipy's adaptive Gauss-Kronrod integrator with a strict
absolute tolerance and a subinterval cap; non-convergence is an error that
names the interval instead of a silently loose value.
"""

from __future__ import annotations

from typing import Callable

from scipy.integrate import quad

ABS_TOL = 1e-10
SUBINTERVAL_CAP = 10**4


class QuadratureError(RuntimeError):
    """The adaptive integrator failed to converge on an interval."""


def integrate(fn: Callable[[float], float], a: float, b: float,
              tol: float = ABS_TOL, limit: int = SUBINTERVAL_CAP) -> float:
    if a == b:
        return 0.0
    result = quad(fn, a, b, epsabs=tol, epsrel=1e-12, limit=limit, full_output=True)
    value, abserr = result[0], result[1]
    if len(result) > 3:
        raise QuadratureError(
            f"quadrature did not converge on [{a}, {b}]: {result[3]}")
    if abserr > max(tol, 1e-8 * abs(value)):
        raise QuadratureError(
            f"quadrature error estimate {abserr:.3e} exceeds tolerance on [{a}, {b}]")
    return value
