"""The 3x3 Boussinesq vessel parameters, the fundamental matrix and its commutant."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

#: primitive cube root of unity exp(2 pi i / 3)
ALPHA = np.exp(2j * np.pi / 3)

CONVENTIONS = ("compatible", "paper")


def _frozen(M) -> np.ndarray:
    arr = np.array(M, dtype=np.complex128)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class VesselParameters:
    sigma1: np.ndarray
    sigma2: np.ndarray
    gamma: np.ndarray
    sigma1_t: np.ndarray
    sigma2_t: np.ndarray
    gamma_t: np.ndarray
    gamma_t_sign: str

    @property
    def g(self) -> complex:
        """The (3,3) entry of gamma_t: +i for the literal reading, -i for the compatible one."""
        return complex(self.gamma_t[2, 2])


def canonical_parameters(sign: str = "compatible") -> VesselParameters:
    """Return the literal parameter matrices for the chosen gamma_t sign."""
    if sign not in CONVENTIONS:
        raise ValueError(f"unknown sign convention {sign!r}; expected one of {CONVENTIONS}")
    s1 = [[0, 0, 1], [0, 1, 0], [1, 0, 0]]
    g = 1j if sign == "paper" else -1j
    return VesselParameters(
        sigma1=_frozen(s1),
        sigma2=_frozen(np.diag([1, 0, 0])),
        gamma=_frozen([[0, 0, 0], [0, 0, 1], [0, -1, 0]]),
        sigma1_t=_frozen(s1),
        sigma2_t=_frozen([[0, -1j, 0], [1j, 0, 0], [0, 0, 0]]),
        gamma_t=_frozen(np.diag([0, 0, g])),
        gamma_t_sign=sign,
    )


def principal_cbrt(lam: complex) -> complex:
    """Cube root with the branch cut on the negative real axis."""
    lam = complex(lam)
    if lam == 0:
        return 0j
    r = abs(lam) ** (1.0 / 3.0)
    return r * np.exp(1j * np.angle(lam) / 3.0)


def phi_generator(lam: complex) -> np.ndarray:
    """sigma1^{-1}(lam sigma2 + gamma), the coefficient of the input ODE."""
    return np.array([[0, -1, 0], [0, 0, 1], [lam, 0, 0]], dtype=np.complex128)


def _phi_series(lam, x, terms=40):
    G = phi_generator(lam) * x
    out = np.eye(3, dtype=np.complex128)
    term = np.eye(3, dtype=np.complex128)
    for j in range(1, terms):
        term = term @ G / j
        out = out + term
        if np.max(np.abs(term)) < 1e-18 * np.max(np.abs(out)):
            break
    return out


def phi(lam: complex, x: float, k: complex | None = None) -> np.ndarray:
    """Fundamental matrix Phi(lam, x) with Phi(lam, 0) = I.

    Uses the closed form in the exponentials E_i = exp(-alpha^(i-1) k x),
    k^3 = lam.  ``k`` may be supplied to pick another cube root; the result is
    branch independent.  Near ``k x = 0`` the closed form loses digits by
    cancellation, so a Taylor series of the exponential is used there, and
    lam = 0 is the nilpotent limit.
    """
    lam = complex(lam)
    x = float(x)
    if x == 0.0:
        return np.eye(3, dtype=np.complex128)
    if lam == 0:
        return np.array([[1, -x, -x * x / 2], [0, 1, x], [0, 0, 1]], dtype=np.complex128)
    if k is None:
        k = principal_cbrt(lam)
    if abs(k * x) < 0.5:
        return _phi_series(lam, x)
    a = ALPHA
    E = [np.exp(-(a ** i) * k * x) for i in range(3)]
    roots = [-(a ** i) * k for i in range(3)]
    # Each column is (u, -u', -u'') for a solution of u''' = -lam u whose
    # initial values come from the matching column of the identity.
    out = np.empty((3, 3), dtype=np.complex128)
    for col in range(3):
        init = np.zeros(3)
        init[col] = 1.0
        u0, du0, ddu0 = init[0], -init[1], -init[2]
        coeff = [(u0 + du0 / r + ddu0 / r ** 2) / 3.0 for r in roots]
        u = sum(c * e for c, e in zip(coeff, E))
        du = sum(c * r * e for c, r, e in zip(coeff, roots, E))
        ddu = sum(c * r * r * e for c, r, e in zip(coeff, roots, E))
        out[:, col] = (u, -du, -ddu)
    return out


def commutant(a: complex, b: complex, c: complex, lam: complex) -> np.ndarray:
    """Member aI + bY1 + cY2 of the commutant of Phi(lam, .)."""
    Y1 = np.array([[0, 1, 0], [0, 0, -1], [-lam, 0, 0]], dtype=np.complex128)
    Y2 = np.array([[0, 0, 1], [-lam, 0, 0], [0, lam, 0]], dtype=np.complex128)
    return a * np.eye(3, dtype=np.complex128) + b * Y1 + c * Y2
