"""The two one-dimensional soliton datasets and their closed-form references.

Both constructors take B and C at the basepoint (0, 0) from the printed
formulas.  X0 is the Sylvester solution of the Lyapunov equation, because
the printed X(0, 0) values violate it; the printed values are kept on the
returned object so the discrepancy can be reported.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import numkernel as nk
from .params import ALPHA, canonical_parameters
from .realization import Realization

SQ3 = np.sqrt(3.0)


@dataclass(frozen=True)
class SolitonSpec:
    kind: str
    mu: complex

    def __post_init__(self):
        if self.kind not in ("classic", "exp"):
            raise ValueError(f"unknown soliton kind {self.kind!r}")
        if complex(self.mu) == 0:
            raise ValueError("mu must be nonzero")


@dataclass(frozen=True, eq=False)
class Soliton:
    spec: SolitonSpec
    realization: Realization
    #: closed form the engine is expected to reproduce
    q_ref: Callable
    #: the closed form exactly as printed next to the dataset
    q_printed: Callable
    #: X(0, 0) from the printed X(x, t) formula
    printed_X0: complex

    @property
    def printed_lyapunov_residual(self) -> float:
        """|A X + X A_zeta + B s1 C| at the basepoint when X is the printed value."""
        r = self.realization
        return float(np.max(np.abs(r.lyapunov_lhs(np.array([[self.printed_X0]]), r.B0, r.C0))))


def _sech2(z):
    return 1.0 / np.cosh(z) ** 2


def _consistent_X0(A, Az, B0, C0):
    s1 = canonical_parameters().sigma1
    return nk.sylvester(A, Az, -B0 @ s1 @ C0)


def soliton_classic(mu: complex) -> Soliton:
    """First dataset: A = (2i mu)^3, A_zeta = (i mu)^3.

    ``q_ref`` is the reference obtained from the printed X(x, t), namely
    -(9/8) mu^2 sech^2((sqrt3/2) mu (x + mu t)); ``q_printed`` is the closed
    form printed next to the dataset, four times larger in amplitude.
    """
    spec = SolitonSpec("classic", mu)
    mu = complex(mu)
    a = ALPHA
    A = np.array([[(2j * mu) ** 3]])
    Az = np.array([[(1j * mu) ** 3]])
    B0 = np.array([[1.0, -2j * a * mu, (2 * a * mu) ** 2]])
    C0 = np.array([[1.0], [-1j * a * mu], [(a * mu) ** 2]])
    X0 = _consistent_X0(A, Az, B0, C0)
    printed = -2 * a / (SQ3 * mu)

    def q_ref(x, t):
        return -(9.0 / 8.0) * mu ** 2 * _sech2(SQ3 / 2 * mu * (np.asarray(x) + mu * np.asarray(t)))

    def q_printed(x, t):
        return -(9.0 / 2.0) * mu ** 2 * _sech2(SQ3 / 2 * mu * (np.asarray(x) + np.asarray(t) * mu))

    return Soliton(spec, Realization(A, Az, X0, B0, C0, 0.0, 0.0), q_ref, q_printed, complex(printed))


def soliton_exp(mu: complex) -> Soliton:
    """Second dataset: A = A_zeta = (2i mu)^3 with two exponential modes in B."""
    spec = SolitonSpec("exp", mu)
    mu = complex(mu)
    a = ALPHA
    k1 = 2j * a * mu
    f1 = 2j * a ** 2 * mu
    c = -1j
    b = 1.0 / (1j + SQ3)
    A = np.array([[(2j * mu) ** 3]])
    B0 = np.array([[b / k1 ** 2 + c / f1 ** 2, -b / k1 - c / f1, -b - c]])
    C0 = np.array([[1 / f1 ** 2], [-1 / f1], [-1.0]])
    X0 = _consistent_X0(A, A, B0, C0)
    printed = a * 2 / (64 * mu ** 5)

    def q_printed(x, t):
        x = np.asarray(x)
        t = np.asarray(t)
        e1 = np.exp(2 * SQ3 * x * mu)
        e2 = np.exp(4 * SQ3 * t * mu ** 2)
        return -18 * np.exp(2 * SQ3 * mu * (x + 2 * t * mu)) * mu ** 2 / (e1 + e2) ** 2

    def q_ref(x, t):
        return -(9.0 / 2.0) * mu ** 2 * _sech2(SQ3 * mu * (np.asarray(x) - 2 * mu * np.asarray(t)))

    return Soliton(spec, Realization(A, A, X0, B0, C0, 0.0, 0.0), q_ref, q_printed, complex(printed))


def make(kind: str, mu: complex) -> Soliton:
    SolitonSpec(kind, mu)
    return soliton_classic(mu) if kind == "classic" else soliton_exp(mu)
