"""Propagation of (B, C, X) from the basepoint to an arbitrary point (x, t).

B is handled through its stacked columns (b1; b2; b3) and C through its
stacked transposed rows (c1^T; c2^T; c3^T), so that both flows are linear
maps on C^{3n} given by 3n x 3n generator matrices.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import lu_solve

from . import numkernel as nk
from .errors import ConventionError, PropagationDiverged, SylvesterSingular
from .params import VesselParameters, canonical_parameters
from .realization import Realization

INTEGRATION_RTOL = 1e-10
INTEGRATION_ATOL = 1e-13


@dataclass(frozen=True)
class Generators:
    Mx_B: np.ndarray
    Mt_B: np.ndarray
    Mx_C: np.ndarray
    Mt_C: np.ndarray

    def commutators(self) -> tuple[float, float]:
        """Max-norms of [Mx_B, Mt_B] and [Mx_C, Mt_C]."""
        cb = self.Mx_B @ self.Mt_B - self.Mt_B @ self.Mx_B
        cc = self.Mx_C @ self.Mt_C - self.Mt_C @ self.Mx_C
        return float(np.max(np.abs(cb))), float(np.max(np.abs(cc)))


def generators(r: Realization, params: VesselParameters | None = None) -> Generators:
    """Block generators of the x- and t-flows.

    The t-flow is assembled from the literal right-hand sides
    B_t = (-g b3, iA b1, -iA b2) and C_t = (g c3, -i c1 A_zeta, i c2 A_zeta),
    g being the (3,3) entry of gamma_t.  For g = -i these coincide with
    -i Mx_B^2 and +i Mx_C^2.
    """
    params = params or canonical_parameters()
    g = params.g
    n = r.dim
    I = np.eye(n, dtype=np.complex128)
    Z = np.zeros((n, n), dtype=np.complex128)
    A = r.A
    AzT = r.A_zeta.T
    Mx_B = np.block([[Z, -I, Z], [Z, Z, I], [-A, Z, Z]])
    Mx_C = np.block([[Z, -I, Z], [Z, Z, I], [-AzT, Z, Z]])
    Mt_B = np.block([[Z, Z, -g * I], [1j * A, Z, Z], [Z, -1j * A, Z]])
    Mt_C = np.block([[Z, Z, g * I], [-1j * AzT, Z, Z], [Z, 1j * AzT, Z]])
    return Generators(Mx_B, Mt_B, Mx_C, Mt_C)


def stack_B(B):
    return np.asarray(B).T.reshape(-1)


def unstack_B(v, n):
    return v.reshape(3, n).T


def stack_C(C):
    return np.asarray(C).reshape(-1)


def unstack_C(v, n):
    return v.reshape(3, n)


@dataclass(frozen=True, eq=False)
class VesselState:
    x: float
    t: float
    B: np.ndarray
    C: np.ndarray
    X: np.ndarray
    tau: complex
    x_min_sv: float
    realization: Realization
    params: VesselParameters
    x_route: str = "sylvester"

    @property
    def point(self):
        return (self.x, self.t)

    def lyapunov_residual(self) -> float:
        """Spectral norm of A X + X A_zeta + B sigma1 C."""
        L = self.realization.lyapunov_lhs(self.X, self.B, self.C)
        return float(np.linalg.norm(L, 2))

    def lyapunov_scale(self) -> float:
        """||A|| ||X|| + ||B|| ||sigma1|| ||C|| in spectral norms."""
        n2 = lambda M: float(np.linalg.norm(M, 2))  # noqa: E731
        return n2(self.realization.A) * n2(self.X) + n2(self.B) * n2(self.C)


class Propagator:
    """Propagation engine for one realization and one sign convention.

    The exponentials of the x- and t-generators are cached per offset, which
    makes grid sweeps (shared x columns, shared t rows) cheap.
    """

    def __init__(self, r: Realization, params: VesselParameters | None = None,
                 cache_size: int = 512):
        self.r = r
        self.params = params or canonical_parameters()
        self.gens = generators(r, self.params)
        self._b0 = stack_B(r.B0)
        self._c0 = stack_C(r.C0)
        self._x_exp = lru_cache(maxsize=cache_size)(self._x_exp_raw)
        self._t_exp = lru_cache(maxsize=cache_size)(self._t_exp_raw)
        self._x0_lu = None

    def _x_exp_raw(self, dx: float):
        return nk.expm(dx * self.gens.Mx_B), nk.expm(dx * self.gens.Mx_C)

    def _t_exp_raw(self, dt: float):
        return nk.expm(dt * self.gens.Mt_B), nk.expm(dt * self.gens.Mt_C)

    @property
    def compatible(self) -> bool:
        return self.params.gamma_t_sign == "compatible"

    def BC(self, x: float, t: float):
        """B and C at (x, t) by the closed-form exponential flows."""
        r = self.r
        dx, dt = float(x) - r.x0, float(t) - r.t0
        if dt != 0.0 and not self.compatible:
            raise ConventionError(
                "the paper sign convention gives non-commuting flows; only t = t0 is reachable"
            )
        EB, EC = self._x_exp(dx)
        b, c = EB @ self._b0, EC @ self._c0
        if dt != 0.0:
            TB, TC = self._t_exp(dt)
            b, c = TB @ b, TC @ c
        n = r.dim
        return unstack_B(b, n), unstack_C(c, n)

    def X_sylvester(self, B, C):
        r = self.r
        return nk.sylvester(r.A, r.A_zeta, -B @ self.params.sigma1 @ C)

    def X_integrated(self, x: float, t: float):
        return integrate_X(self.r, x, t, self.params)

    def state(self, x: float, t: float, route: str = "auto") -> VesselState:
        """Full vessel state at (x, t).

        ``route`` is ``"auto"`` (Sylvester with integration fallback),
        ``"sylvester"`` or ``"integrate"``.
        """
        r = self.r
        x, t = float(x), float(t)
        B, C = self.BC(x, t)
        used = route
        if x == r.x0 and t == r.t0:
            X = np.array(r.X0)
            used = "basepoint"
        elif route == "integrate":
            X = self.X_integrated(x, t)
        else:
            try:
                X = self.X_sylvester(B, C)
                used = "sylvester"
            except SylvesterSingular:
                if route == "sylvester":
                    raise
                X = self.X_integrated(x, t)
                used = "integrate"
        if self._x0_lu is None:
            self._x0_lu = nk.lu_factor(r.X0)
        if used == "basepoint":
            return VesselState(x, t, B, C, X, 1.0 + 0.0j, 1.0, r, self.params, used)
        Y = lu_solve(self._x0_lu, X, check_finite=False)
        tau = nk.det_lu(Y)
        return VesselState(x, t, B, C, X, tau, nk.min_sv(Y), r, self.params, used)


def propagate(r: Realization, x: float, t: float, params: VesselParameters | None = None,
              route: str = "auto") -> VesselState:
    """Vessel state at (x, t); see :class:`Propagator` for repeated use."""
    return Propagator(r, params).state(x, t, route)


def integrate_X(r: Realization, x: float, t: float,
                params: VesselParameters | None = None) -> np.ndarray:
    """X(x, t) by adaptive RK45 integration of the joint (B, C, X) system.

    The path runs along x at t = t0 and then along t at fixed x, with the
    relative step tolerance set to 1e-10.
    """
    params = params or canonical_parameters()
    if float(t) != r.t0 and params.gamma_t_sign != "compatible":
        raise ConventionError("t-integration requires the compatible sign convention")
    gens = generators(r, params)
    n = r.dim
    y = np.concatenate([stack_B(r.B0), stack_C(r.C0), np.array(r.X0).reshape(-1)])

    def leg(y, M_b, M_c, sig2, span):
        if span[0] == span[1]:
            return y

        def rhs(_s, v):
            b = v[: 3 * n]
            c = v[3 * n: 6 * n]
            B = unstack_B(b, n)
            C = unstack_C(c, n)
            return np.concatenate([M_b @ b, M_c @ c, (B @ sig2 @ C).reshape(-1)])

        sol = solve_ivp(rhs, span, y, method="RK45", rtol=INTEGRATION_RTOL,
                        atol=INTEGRATION_ATOL)
        if not sol.success:
            raise PropagationDiverged(sol.message)
        return sol.y[:, -1]

    y = leg(y, gens.Mx_B, gens.Mx_C, params.sigma2, (r.x0, float(x)))
    y = leg(y, gens.Mt_B, gens.Mt_C, params.sigma2_t, (r.t0, float(t)))
    return y[6 * n:].reshape(n, n)


def compatibility_residual(r: Realization, point, h: float = 1e-4,
                           params: VesselParameters | None = None) -> float:
    """Central-difference check that dX = B s2 C dx + B s2t C dt is exact.

    The x- and t-shifts are generated from the state at ``point`` by each
    flow separately, so the check is meaningful for both conventions: it
    estimates max|d_t(B s2 C) - d_x(B s2t C)|.
    """
    if h <= 0:
        raise ValueError("h must be positive")
    params = params or canonical_parameters()
    gens = generators(r, params)
    n = r.dim
    x, t = point
    if params.gamma_t_sign == "compatible":
        B, C = Propagator(r, params).BC(x, t)
    else:
        B, C = Propagator(r, params).BC(x, r.t0)
    b, c = stack_B(B), stack_C(C)

    def shifted(Mb, Mc, s):
        return (unstack_B(nk.expm(s * Mb) @ b, n), unstack_C(nk.expm(s * Mc) @ c, n))

    def form(pair, sig):
        return pair[0] @ sig @ pair[1]

    s2, s2t = params.sigma2, params.sigma2_t
    dt = (form(shifted(gens.Mt_B, gens.Mt_C, h), s2)
          - form(shifted(gens.Mt_B, gens.Mt_C, -h), s2)) / (2 * h)
    dx = (form(shifted(gens.Mx_B, gens.Mx_C, h), s2t)
          - form(shifted(gens.Mx_B, gens.Mx_C, -h), s2t)) / (2 * h)
    return float(np.max(np.abs(dt - dx)))
