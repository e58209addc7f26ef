"""Grid sampling, Boussinesq residuals, beta calibration and the singular-set atlas.

Residual conventions: with pi = pi11 the ladder residual is

    pi_tt - beta * (pi_xxxx + 12 pi_x pi_xx),

and differentiating it once in x (q = -3/2 pi_x) gives the q-form used by
the finite-difference residual

    q_tt - beta * d_xx (q_xx - 4 q^2).

The same beta therefore enters both reports.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np
from scipy import ndimage

from .errors import DegenerateFit, SingularState, TooFewPoints
from .evolution import Propagator
from .params import canonical_parameters
from .potentials import MomentLadder, gamma_star
from .realization import Realization

DEFAULT_TOL = 1e-8
SCALAR_FIELDS = ("q", "p", "tau", "pi11", "q_x", "q_xx", "q_xxx", "q_xxxx", "q_t", "q_tt", "min_sv")
GAMMA_FIELDS = tuple(f"gs{i}{j}" for i in range(1, 4) for j in range(1, 4))
KNOWN_FIELDS = SCALAR_FIELDS + GAMMA_FIELDS


@dataclass(frozen=True)
class GridSpec:
    x0: float
    x1: float
    nx: int
    t0: float
    t1: float
    nt: int

    def __post_init__(self):
        if self.nx < 2 or self.nt < 2:
            raise ValueError("nx and nt must be at least 2")
        if not all(math.isfinite(v) for v in (self.x0, self.x1, self.t0, self.t1)):
            raise ValueError("grid extents must be finite")
        if self.x1 <= self.x0 or self.t1 <= self.t0:
            raise ValueError("grid extents must be increasing")

    @property
    def hx(self) -> float:
        return (self.x1 - self.x0) / (self.nx - 1)

    @property
    def ht(self) -> float:
        return (self.t1 - self.t0) / (self.nt - 1)

    @property
    def xs(self) -> np.ndarray:
        return np.linspace(self.x0, self.x1, self.nx)

    @property
    def ts(self) -> np.ndarray:
        return np.linspace(self.t0, self.t1, self.nt)

    @classmethod
    def centered(cls, xc, tc, half_x, half_t, h):
        """Grid of spacing h in both directions around (xc, tc)."""
        nx = int(round(2 * half_x / h)) + 1
        nt = int(round(2 * half_t / h)) + 1
        return cls(xc - half_x, xc + half_x, nx, tc - half_t, tc + half_t, nt)


@dataclass
class FieldGrid:
    spec: GridSpec
    fields: dict
    mask: np.ndarray
    components: int = 0
    #: min_sv(X0^{-1} X) on every cell, masked or not
    min_sv: np.ndarray | None = None
    #: tau on every cell (diagnostic for the atlas; not a potential)
    tau_all: np.ndarray | None = None

    def unmasked_points(self):
        xs, ts = self.spec.xs, self.spec.ts
        return [(xs[i], ts[j]) for i in range(self.spec.nx) for j in range(self.spec.nt)
                if not self.mask[i, j]]


@dataclass
class ResidualReport:
    beta: float
    max_residual: float
    rms_residual: float
    convergence_order: float | None
    mode: str
    grid: GridSpec | None = None
    points: int = 0

    def to_dict(self) -> dict:
        out = asdict(self)
        out["grid"] = asdict(self.grid) if self.grid is not None else None
        return out


@dataclass
class BetaFit:
    beta: float
    fit_residual: float
    points: int

    def __float__(self):
        return self.beta


def worker_count(requested: int | None = None) -> int:
    """Explicit request first, then VESSEL_LAB_THREADS, then min(4, cpu count)."""
    if requested is not None:
        return max(1, int(requested))
    env = os.environ.get("VESSEL_LAB_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ValueError(f"VESSEL_LAB_THREADS must be an integer, got {env!r}") from None
    return max(1, min(4, os.cpu_count() or 1))


def _needed_order(names) -> int:
    order = 0
    for n in names:
        if n in ("q", "p"):
            order = max(order, 1)
        elif n in ("q_x", "q_t"):
            order = max(order, 2)
        elif n in ("q_xx", "q_tt"):
            order = max(order, 3)
        elif n == "q_xxx":
            order = max(order, 4)
        elif n == "q_xxxx":
            order = max(order, 5)
    return order


def _point_values(prop, x, t, names, order):
    st = prop.state(x, t)
    out = {"min_sv": complex(st.x_min_sv), "tau": complex(st.tau)}
    if st.x_min_sv <= 1e-12:
        raise SingularState("singular point")
    L = MomentLadder(st, max(order, 0))
    P = L.H[0]
    out["pi11"] = complex(P[0, 0])
    if any(n in GAMMA_FIELDS for n in names):
        gs = gamma_star(L)
        for i in range(3):
            for j in range(3):
                out[f"gs{i + 1}{j + 1}"] = complex(gs[i, j])
    c = -1.5
    if order >= 1:
        P1 = L.deriv(0, 1, 0)
        out["q"] = c * P1[0, 0]
        out["p"] = complex(-1j * (-P[0, 2] + P[2, 0] + P[0, 0] * (P[0, 1] - P[1, 0])
                                  - (P1[0, 1] - P1[1, 0]) / 2))
    for name, (a, b) in (("q_x", (0, 2)), ("q_t", (1, 1)), ("q_xx", (0, 3)),
                         ("q_tt", (2, 1)), ("q_xxx", (0, 4)), ("q_xxxx", (0, 5))):
        if name in names:
            out[name] = c * L.pi11(a, b)
    return out


def _sample_column(args):
    r, sign, x, ts, names, tol = args
    prop = Propagator(r, canonical_parameters(sign))
    order = _needed_order(names)
    vals = np.full((len(names), len(ts)), np.nan + 1j * np.nan, dtype=complex)
    mask = np.zeros(len(ts), dtype=bool)
    svs = np.zeros(len(ts))
    taus = np.zeros(len(ts), dtype=complex)
    for j, t in enumerate(ts):
        st = prop.state(x, t)
        svs[j] = st.x_min_sv
        taus[j] = st.tau
        if st.x_min_sv < tol:
            mask[j] = True
            continue
        try:
            pv = _point_values(prop, x, t, names, order)
        except SingularState:
            mask[j] = True
            continue
        row = [pv[n] for n in names]
        if not all(np.isfinite(v) for v in row):
            mask[j] = True
            continue
        vals[:, j] = row
    return vals, mask, svs, taus


def sample(r: Realization, spec: GridSpec, names=("q", "tau"), tol: float = DEFAULT_TOL,
           params=None, workers: int | None = None) -> FieldGrid:
    """Sample the named fields on the grid; arrays are indexed [ix, jt].

    Cells with min_sv(X0^{-1} X) < tol are masked and hold NaN.  Each x
    column is an independent task, so the result does not depend on the
    number of workers.
    """
    names = tuple(names)
    unknown = [n for n in names if n not in KNOWN_FIELDS]
    if unknown:
        raise ValueError(f"unknown field(s) {unknown}; known: {', '.join(KNOWN_FIELDS)}")
    params = params or canonical_parameters()
    ts = spec.ts
    tasks = [(r, params.gamma_t_sign, float(x), ts, names, tol) for x in spec.xs]
    nw = worker_count(workers)
    if nw > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=nw) as ex:
            cols = list(ex.map(_sample_column, tasks, chunksize=max(1, len(tasks) // (4 * nw))))
    else:
        cols = [_sample_column(t) for t in tasks]
    fields = {n: np.empty((spec.nx, spec.nt), dtype=complex) for n in names}
    mask = np.zeros((spec.nx, spec.nt), dtype=bool)
    svs = np.zeros((spec.nx, spec.nt))
    taus = np.zeros((spec.nx, spec.nt), dtype=complex)
    for i, (vals, m, sv, tau) in enumerate(cols):
        for k, n in enumerate(names):
            fields[n][i] = vals[k]
        mask[i] = m
        svs[i] = sv
        taus[i] = tau
    if "min_sv" in fields:
        fields["min_sv"] = svs.astype(complex)
    _, ncomp = ndimage.label(mask)
    return FieldGrid(spec, fields, mask, int(ncomp), svs, taus)


# ---------------------------------------------------------------------------
# residuals

def _fd_residual_array(q, hx, ht, beta):
    """Residual on interior cells; returns an array with NaN outside the interior."""
    nx, nt = q.shape
    R = np.full(q.shape, np.nan + 0j)
    if nx < 5 or nt < 3:
        return R
    q_tt = (q[2:-2, 2:] - 2 * q[2:-2, 1:-1] + q[2:-2, :-2]) / ht ** 2
    q_xxxx = (q[4:, 1:-1] - 4 * q[3:-1, 1:-1] + 6 * q[2:-2, 1:-1] - 4 * q[1:-3, 1:-1]
              + q[:-4, 1:-1]) / hx ** 4
    sq = q * q
    sq_xx = (sq[3:-1, 1:-1] - 2 * sq[2:-2, 1:-1] + sq[1:-3, 1:-1]) / hx ** 2
    R[2:-2, 1:-1] = q_tt - beta * (q_xxxx - 4 * sq_xx)
    return R


def _fd_stats(field: FieldGrid, beta):
    if "q" not in field.fields:
        raise ValueError("field grid has no 'q' samples")
    spec = field.spec
    if spec.nx < 5 or spec.nt < 5:
        raise TooFewPoints("finite-difference residual needs nx, nt >= 5")
    q = np.where(field.mask, np.nan, field.fields["q"])
    R = _fd_residual_array(q, spec.hx, spec.ht, beta)
    vals = np.abs(R[np.isfinite(R)])
    if vals.size == 0:
        raise TooFewPoints("no interior cell has an unmasked stencil")
    return float(vals.max()), float(np.sqrt(np.mean(vals ** 2))), int(vals.size)


def residual_fd(field: FieldGrid, beta: float, companion: FieldGrid | None = None) -> ResidualReport:
    """Finite-difference Boussinesq residual with 2nd-order central stencils.

    ``companion`` is the same region sampled with the other step of an
    h-halving pair (either finer or coarser); the convergence order is
    log2 of the ratio of the coarse to the fine maximum residual.
    """
    mx, rms, npts = _fd_stats(field, beta)
    order = None
    if companion is not None:
        cmx, _, _ = _fd_stats(companion, beta)
        coarse, fine = (cmx, mx) if companion.spec.hx > field.spec.hx else (mx, cmx)
        ratio = companion.spec.hx / field.spec.hx
        ratio = ratio if ratio > 1 else 1 / ratio
        if fine > 0 and coarse > 0:
            order = math.log(coarse / fine) / math.log(ratio)
        else:
            order = float("nan")
    return ResidualReport(float(beta), mx, rms, order, "finite_difference", field.spec, npts)


def _ladder_terms(prop, x, t):
    st = prop.state(x, t)
    L = MomentLadder(st, 4)
    lhs = L.pi11(2, 0)
    design = L.pi11(0, 4) + 12 * L.pi11(0, 1) * L.pi11(0, 2)
    return lhs, design


def residual_ladder(r: Realization, points, beta: float, params=None) -> ResidualReport:
    """pi_tt - beta (pi_xxxx + 12 pi_x pi_xx) from the exact ladder, max/rms over points."""
    prop = Propagator(r, params)
    res = []
    for x, t in points:
        lhs, design = _ladder_terms(prop, x, t)
        res.append(abs(lhs - beta * design))
    res = np.asarray(res)
    if res.size == 0:
        raise TooFewPoints("no points supplied")
    return ResidualReport(float(beta), float(res.max()), float(np.sqrt(np.mean(res ** 2))),
                          None, "ladder", None, int(res.size))


def calibrate_beta(r: Realization, points, params=None, min_points: int = 10) -> BetaFit:
    """Real least-squares beta for pi_tt = beta (pi_xxxx + 12 pi_x pi_xx)."""
    points = list(points)
    if len(points) < min_points:
        raise TooFewPoints(f"calibration needs at least {min_points} points, got {len(points)}")
    prop = Propagator(r, params)
    y, d = [], []
    for x, t in points:
        lhs, design = _ladder_terms(prop, x, t)
        y.append(lhs)
        d.append(design)
    y = np.asarray(y)
    d = np.asarray(d)
    dn = float(np.linalg.norm(d))
    if dn <= 1e-12 * max(1.0, float(np.linalg.norm(y))):
        raise DegenerateFit("design column vanishes: no nonlinear signal to calibrate against")
    beta = float(np.real(np.vdot(d, y)) / dn ** 2)
    fit = float(np.linalg.norm(y - beta * d) / max(float(np.linalg.norm(y)), 1e-300))
    return BetaFit(beta, fit, len(points))


def singular_scan(r: Realization, spec: GridSpec, tol: float = DEFAULT_TOL, params=None,
                  workers: int | None = None) -> FieldGrid:
    """Mask of cells with min_sv(X0^{-1} X) < tol, the min_sv field and the component count.

    The comparison is strict, so tol = 0 never flags a cell.
    """
    return sample(r, spec, ("min_sv",), tol=tol, params=params, workers=workers)


# ---------------------------------------------------------------------------
# export

def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def to_csv(field: FieldGrid, names) -> str:
    names = list(names)
    header = ["x", "t"]
    for n in names:
        header += [f"re_{n}", f"im_{n}"]
    header.append("masked")
    lines = [",".join(header)]
    xs, ts = field.spec.xs, field.spec.ts
    for i, x in enumerate(xs):
        for j, t in enumerate(ts):
            row = [_fmt(x), _fmt(t)]
            m = bool(field.mask[i, j])
            for n in names:
                v = field.fields[n][i, j]
                if m and n != "min_sv":
                    row += ["", ""]
                else:
                    row += [_fmt(v.real), _fmt(v.imag)]
            row.append("1" if m else "0")
            lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def write_csv(field: FieldGrid, names, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(to_csv(field, names))


def report_json(reports, extra: dict | None = None) -> str:
    doc = {"reports": [rep.to_dict() for rep in reports]}
    if extra:
        doc.update(extra)
    return json.dumps(doc, indent=1, default=_json_default) + "\n"


def _json_default(o):
    if isinstance(o, complex):
        return [o.real, o.imag]
    if isinstance(o, np.generic):
        return o.item()
    raise TypeError(f"cannot serialize {type(o).__name__}")
