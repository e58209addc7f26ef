"""Moments H_n = C X^{-1} A^n B, their exact derivatives, and the potentials q, p."""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb

import numpy as np
from scipy.linalg import lu_solve

from . import numkernel as nk
from .errors import SingularState
from .evolution import VesselState

#: states whose min_sv(X0^{-1} X) falls at or below this are rejected
SINGULAR_TOL = 1e-12


def _x_factor(state: VesselState):
    if state.x_min_sv <= SINGULAR_TOL:
        raise SingularState(f"X is numerically singular at {state.point} "
                            f"(min_sv {state.x_min_sv:.3e})")
    try:
        return nk.lu_factor(state.X)
    except nk.SingularMatrix as exc:
        raise SingularState(str(exc)) from exc


class MomentLadder:
    """Moments of a state together with their exact (x, t) derivatives.

    Derivatives come from the recurrences

        d_x H_n = s1 s2 H_{n+1} - H_{n+1} s2 s1 + s1 gamma* H_n - H_n gamma s1
        d_t H_n = the same with the tilde parameters,

    applied repeatedly with the Leibniz rule (gamma* itself depends on H_0).
    ``deriv(a, b, n)`` is d_t^a d_x^b H_n and needs moments up to n + a + b.
    """

    def __init__(self, state: VesselState, N: int):
        if N < 0:
            raise ValueError("N must be non-negative")
        self.state = state
        self.params = state.params
        self.N = N
        lu = _x_factor(state)
        CX = lu_solve(lu, state.C.T, trans=1, check_finite=False).T  # C X^{-1}
        A = state.realization.A
        H = []
        AB = np.array(state.B)
        for _ in range(N + 1):
            H.append(CX @ AB)
            AB = A @ AB
        self.H = H
        self._memo: dict = {}

    # -- derivatives --------------------------------------------------------

    def deriv(self, a: int, b: int, n: int) -> np.ndarray:
        """d_t^a d_x^b H_n."""
        if n + a + b > self.N:
            raise ValueError(f"derivative ({a},{b}) of H_{n} needs moments up to "
                             f"{n + a + b}, ladder has {self.N}")
        key = (a, b, n)
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        if a == 0 and b == 0:
            out = self.H[n]
        elif b > 0:
            out = self._step(a, b - 1, n, self.params.sigma2, self.params.gamma, x_step=True)
        else:
            out = self._step(a - 1, 0, n, self.params.sigma2_t, self.params.gamma_t, x_step=False)
        self._memo[key] = out
        return out

    def _step(self, a, b, n, s2, gam, x_step):
        # one more derivative applied on top of d_t^a d_x^b H_n
        s1 = self.params.sigma1
        out = s1 @ s2 @ self.deriv(a, b, n + 1) - self.deriv(a, b, n + 1) @ s2 @ s1 \
            - self.deriv(a, b, n) @ gam @ s1
        # Leibniz over the product s1 gamma*(x,t) H_n; gamma* varies through H_0
        for i in range(a + 1):
            for j in range(b + 1):
                w = comb(a, i) * comb(b, j)
                D0 = self.deriv(i, j, 0)
                G = s2 @ D0 @ s1 - s1 @ D0 @ s2
                if i == 0 and j == 0:
                    G = G + gam
                out = out + w * (s1 @ G @ self.deriv(a - i, b - j, n))
        return out

    # -- convenience --------------------------------------------------------

    @property
    def pi(self) -> np.ndarray:
        return self.H[0]

    @property
    def g(self) -> np.ndarray:
        return self.H[1]

    @property
    def dH_dx(self) -> list:
        return [self.deriv(0, 1, n) for n in range(self.N)]

    @property
    def dH_dt(self) -> list:
        return [self.deriv(1, 0, n) for n in range(self.N)]

    def pi11(self, a: int = 0, b: int = 0) -> complex:
        """d_t^a d_x^b of the (1,1) entry of H_0."""
        return complex(self.deriv(a, b, 0)[0, 0])


def moments(state: VesselState, N: int) -> MomentLadder:
    return MomentLadder(state, N)


def ladder_derivatives(state: VesselState, N: int) -> MomentLadder:
    """Ladder holding H_0..H_{N+1}, so that dH_dx and dH_dt cover n = 0..N."""
    return MomentLadder(state, N + 1)


def gamma_star(ladder: MomentLadder, params=None, tilde: bool = False) -> np.ndarray:
    """Output potential gamma* = gamma + s2 H0 s1 - s1 H0 s2 (tilde variant optional)."""
    p = params or ladder.params
    H0 = ladder.H[0]
    if tilde:
        return p.gamma_t + p.sigma2_t @ H0 @ p.sigma1 - p.sigma1 @ H0 @ p.sigma2_t
    return p.gamma + p.sigma2 @ H0 @ p.sigma1 - p.sigma1 @ H0 @ p.sigma2


@dataclass
class PotentialSample:
    q: complex
    p: complex
    q_x: complex
    q_xx: complex
    q_xxx: complex
    q_xxxx: complex
    q_t: complex
    q_tt: complex
    pi11: complex = 0j
    extra: dict = field(default_factory=dict)


def q_p(state: VesselState, ladder: MomentLadder | None = None) -> PotentialSample:
    """q = -(3/2) d_x pi11 and p from H_0, with exact derivatives of q."""
    L = ladder if ladder is not None and ladder.N >= 5 else MomentLadder(state, 5)
    P0 = L.H[0]
    P1 = L.deriv(0, 1, 0)
    c = -1.5
    p = -1j * (-P0[0, 2] + P0[2, 0] + P0[0, 0] * (P0[0, 1] - P0[1, 0])
               - (P1[0, 1] - P1[1, 0]) / 2)
    return PotentialSample(
        q=c * L.pi11(0, 1),
        p=complex(p),
        q_x=c * L.pi11(0, 2),
        q_xx=c * L.pi11(0, 3),
        q_xxx=c * L.pi11(0, 4),
        q_xxxx=c * L.pi11(0, 5),
        q_t=c * L.pi11(1, 1),
        q_tt=c * L.pi11(2, 1),
        pi11=L.pi11(0, 0),
    )


def tau_ratios(L: MomentLadder) -> dict:
    """tau^{(k)}/tau for k = 1..4 in x, expressed through pi11 = tau'/tau."""
    p0, p1, p2, p3 = (L.pi11(0, k) for k in range(4))
    return {
        1: p0,
        2: p1 + p0 ** 2,
        3: p2 + 3 * p0 * p1 + p0 ** 3,
        4: p3 + 4 * p0 * p2 + 3 * p1 ** 2 + 6 * p0 ** 2 * p1 + p0 ** 4,
    }


#: relations whose derivation uses the normalization pi31 + pi13 + pi22 = 0
NEEDS_NORMALIZATION = ("pi31", "pi32", "pi13'", "pi12relation")


@dataclass
class PiRelations:
    residuals: dict
    normalized: bool
    symmetric: dict | None = None

    def applicable(self) -> dict:
        """Residuals of relations whose hypotheses hold for this vessel."""
        return {k: v for k, v in self.residuals.items()
                if self.normalized or k not in NEEDS_NORMALIZATION}


def pi_relations(state: VesselState, normalized: bool | None = None,
                 symmetric: bool | None = None) -> PiRelations:
    """|LHS - RHS| for each entry relation of H_0.

    Every residual is measured; ``PiRelations.applicable`` drops the ones
    that assume the normalization when the vessel is not normalized.
    """
    from .realization import validate

    L = MomentLadder(state, 4)
    P = L.H[0]
    d1 = L.deriv(0, 1, 0)
    d2 = L.deriv(0, 2, 0)
    p = lambda i, j: P[i - 1, j - 1]  # noqa: E731
    a0, a1, a2, a3 = (L.pi11(0, k) for k in range(4))
    p12x, p12xx = d1[0, 1], d2[0, 1]
    p13x = d1[0, 2]
    res = {
        "pi21": p(2, 1) + p(1, 2) + a0 ** 2 + a1,
        "pi22": p(2, 2) - (-a0 * p(1, 2) + p(1, 3) - p12x),
        "pi31": p(3, 1) - (p(1, 3) - a0 ** 3 - a0 * (2 * p(1, 2) + 3 * a1) - 2 * p12x - a2),
        "pi32": p(3, 2) - (p(1, 2) * p(2, 1) - p(2, 3) - p(1, 2) * a1
                           - 1.5 * (a1 ** 2 - a0 * a2) + 0.5 * a3),
        "pi13'": p13x - (-1.5 * a1 ** 2 + a0 * p12x + 1.5 * a0 * a2 + p12xx + 0.5 * a3),
        "pi12relation": 6 * p(1, 2) * a1 - (-(6 * a0 + 15 * a1) * a1 + 3 * a0 * a2 + a3),
    }
    res = {k: float(abs(v)) for k, v in res.items()}
    res["normalization"] = float(abs(p(3, 1) + p(1, 3) + p(2, 2)))
    if normalized is None or symmetric is None:
        rep = validate(state.realization)
        normalized = rep.normalized if normalized is None else normalized
        symmetric = rep.symmetric if symmetric is None else symmetric
    sym = None
    if symmetric:
        tr = tau_ratios(L)
        q = -1.5 * a1
        q_xx = -1.5 * a3
        sym = {
            "hermitian_H0": float(np.max(np.abs(P - P.conj().T))),
            "re_pi12": float(abs(p(1, 2).real + tr[2] / 2)),
            "pi22": float(abs(p(2, 2) - tr[3] / 3)),
            "re_pi13": float(abs(p(1, 3).real + tr[3] / 6)),
            "im_pi13": float(abs(p(1, 3).imag - (a0 * p(1, 2).imag + p12x.imag))),
            "re_pi23": float(abs(p(2, 3).real - (p(1, 2).imag ** 2 / 2
                                                  + 2.0 / 9.0 * (q ** 2 - q_xx / 4)
                                                  + tr[4] / 8))),
        }
    return PiRelations(res, bool(normalized), sym)
