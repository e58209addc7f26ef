"""Realization data (A, A_zeta, X0, B0, C0, basepoint): validation, generation, files."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import numkernel as nk
from .errors import GenerationFailed, MalformedRealization, SchemaError, SylvesterSingular
from .params import canonical_parameters

SIGMA1 = canonical_parameters().sigma1

SYMMETRY_TOL = 1e-12
NORMALIZATION_TOL = 1e-9
LYAPUNOV_TOL = 1e-10
X0_RANK_TOL = 1e-10


def _ro(M):
    arr = np.array(M, dtype=np.complex128)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Realization:
    A: np.ndarray
    A_zeta: np.ndarray
    X0: np.ndarray
    B0: np.ndarray
    C0: np.ndarray
    x0: float = 0.0
    t0: float = 0.0

    def __post_init__(self):
        for name in ("A", "A_zeta", "X0", "B0", "C0"):
            object.__setattr__(self, name, _ro(getattr(self, name)))
        object.__setattr__(self, "x0", float(self.x0))
        object.__setattr__(self, "t0", float(self.t0))
        n = self.A.shape[0] if self.A.ndim == 2 else -1
        shapes = {
            "A": (n, n), "A_zeta": (n, n), "X0": (n, n), "B0": (n, 3), "C0": (3, n),
        }
        for name, shape in shapes.items():
            arr = getattr(self, name)
            if arr.shape != shape:
                raise MalformedRealization(f"{name} has shape {arr.shape}, expected {shape}")
            if not np.all(np.isfinite(arr)):
                raise MalformedRealization(f"{name} has non-finite entries")
        if n < 1:
            raise MalformedRealization("dimension must be at least 1")

    @property
    def dim(self) -> int:
        return self.A.shape[0]

    def lyapunov_lhs(self, X, B, C):
        return self.A @ X + X @ self.A_zeta + B @ SIGMA1 @ C

    def __eq__(self, other):
        if not isinstance(other, Realization):
            return NotImplemented
        return (
            self.x0 == other.x0 and self.t0 == other.t0
            and all(np.array_equal(getattr(self, k), getattr(other, k))
                    for k in ("A", "A_zeta", "X0", "B0", "C0"))
        )

    __hash__ = None


def lyapunov_scale(A, A_zeta, X, B, C) -> float:
    """Scale used to make Lyapunov residuals relative."""
    n2 = lambda M: float(np.linalg.norm(M, 2))  # noqa: E731
    return max(n2(A) * n2(X) + n2(A_zeta) * n2(X) + n2(B) * n2(C), 1e-300)


@dataclass
class ValidationReport:
    lyapunov_residual: float
    lyapunov_relative: float
    x0_min_sv: float
    symmetric: bool
    normalized: bool
    normalization_value: complex
    notes: list[str] = field(default_factory=list)
    x0_norm: float = 1.0

    @property
    def ok(self) -> bool:
        """True when the realization invariants hold."""
        return self.lyapunov_relative <= LYAPUNOV_TOL and self.x0_invertible

    @property
    def x0_invertible(self) -> bool:
        return self.x0_min_sv > X0_RANK_TOL * self.x0_norm

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "lyapunov_residual": self.lyapunov_residual,
            "lyapunov_relative": self.lyapunov_relative,
            "x0_min_sv": self.x0_min_sv,
            "symmetric": self.symmetric,
            "normalized": self.normalized,
            "normalization_value": [self.normalization_value.real, self.normalization_value.imag],
            "notes": list(self.notes),
        }


def normalization_value(r: Realization) -> complex:
    """pi31 + pi13 + pi22 of H0 at the basepoint.

    By the Lyapunov equation this equals -(tr A + tr A_zeta), so it is
    available even when X0 is singular; the direct H0 evaluation is used
    whenever X0 can be factored.
    """
    try:
        H0 = r.C0 @ nk.lu_solve(r.X0, r.B0)
    except nk.SingularMatrix:
        return complex(-(np.trace(r.A) + np.trace(r.A_zeta)))
    return complex(H0[2, 0] + H0[0, 2] + H0[1, 1])


def validate(r: Realization) -> ValidationReport:
    if not isinstance(r, Realization):
        raise MalformedRealization("validate expects a Realization")
    L = r.lyapunov_lhs(r.X0, r.B0, r.C0)
    res = float(np.max(np.abs(L)))
    rel = float(np.linalg.norm(L, 2)) / lyapunov_scale(r.A, r.A_zeta, r.X0, r.B0, r.C0)
    sv = nk.min_sv(r.X0)
    sym = bool(
        np.max(np.abs(r.A_zeta - r.A.conj().T)) <= SYMMETRY_TOL
        and np.max(np.abs(r.C0 - r.B0.conj().T)) <= SYMMETRY_TOL
    )
    norm_val = normalization_value(r)
    notes = [
        "finite dimension: the domain regularity assumptions hold automatically",
    ]
    x0_norm = float(np.max(np.abs(r.X0)))
    report = ValidationReport(
        lyapunov_residual=res,
        lyapunov_relative=rel,
        x0_min_sv=sv,
        symmetric=sym,
        normalized=bool(abs(norm_val) <= NORMALIZATION_TOL),
        normalization_value=norm_val,
        notes=notes,
        x0_norm=x0_norm,
    )
    if not report.x0_invertible:
        notes.append(f"X0 is singular: min singular value {sv:.3e}")
    if rel > LYAPUNOV_TOL:
        notes.append(f"Lyapunov equation violated at the basepoint: relative residual {rel:.3e}")
    try:
        nk.sylvester(r.A, r.A_zeta, -r.B0 @ SIGMA1 @ r.C0)
    except SylvesterSingular:
        notes.append("spectra of A and -A_zeta are resonant: X is propagated by path integration")
    if not report.normalized:
        notes.append(f"not normalized: pi31+pi13+pi22 = {norm_val:.6g}")
    return report


# ---------------------------------------------------------------------------
# random generation

def _disc_eigs(rng, n, radius):
    rad = radius * np.sqrt(rng.uniform(size=n))
    ang = rng.uniform(0, 2 * np.pi, size=n)
    return rad * np.exp(1j * ang)


def _unit_disc(rng, shape):
    rad = np.sqrt(rng.uniform(size=shape))
    return rad * np.exp(1j * rng.uniform(0, 2 * np.pi, size=shape))


def _with_spectrum(rng, eigs):
    """Random upper-triangular matrix with the given diagonal, conjugated by a unitary."""
    n = eigs.size
    T = np.diag(eigs) + np.triu(0.3 * _unit_disc(rng, (n, n)), 1)
    Z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    Q, _ = np.linalg.qr(Z)
    return Q @ T @ Q.conj().T


def _separated(eA, eZ, gap=0.1):
    return np.min(np.abs(eA[:, None] + eZ[None, :])) >= gap


def _normalize_traces(eA, eZ):
    """Shift the spectra so that tr A + tr A_zeta = 0.

    The shift moves every sum a + z, so the caller rechecks the resonance gap.
    """
    shift = -(np.sum(eA) + np.sum(eZ)).real / (eA.size + eZ.size)
    eA = eA + shift
    eZ = eZ + shift
    # imaginary parts: move the whole imaginary trace onto A_zeta
    eZ = eZ - 1j * (np.sum(eA) + np.sum(eZ)).imag / eZ.size
    return eA, eZ


def _retry_loop(n, seed, build):
    if n < 1:
        raise ValueError("n must be at least 1")
    seq = np.random.SeedSequence([int(seed) & 0xFFFFFFFF, n])
    for child in seq.spawn(100):
        rng = np.random.default_rng(child)
        out = build(rng)
        if out is not None:
            return out
    raise GenerationFailed(f"no acceptable realization for n={n}, seed={seed} after 100 attempts")


def _finish(A, Az, B0, C0):
    try:
        X0 = nk.sylvester(A, Az, -B0 @ SIGMA1 @ C0)
    except SylvesterSingular:
        return None
    if nk.min_sv(X0) < 1e-6:
        return None
    r = Realization(A, Az, X0, B0, C0, 0.0, 0.0)
    if validate(r).lyapunov_relative > LYAPUNOV_TOL:
        return None
    return r


def random_regular(n: int, seed: int, normalized: bool = False, radius: float = 1.0) -> Realization:
    """Random non-resonant realization, deterministic per (n, seed).

    Eigenvalues of A and A_zeta lie in a disc of the given radius with every
    sum a + z at least 0.1 away from zero; B0 and C0 have entries in the unit
    disc.  With ``normalized=True`` the traces are shifted so that the
    normalization constant pi31 + pi13 + pi22 vanishes.
    """

    def build(rng):
        eA = _disc_eigs(rng, n, radius)
        eZ = _disc_eigs(rng, n, radius)
        if normalized:
            eA, eZ = _normalize_traces(eA, eZ)
        if not _separated(eA, eZ):
            return None
        A = _with_spectrum(rng, eA)
        Az = _with_spectrum(rng, eZ)
        B0 = _unit_disc(rng, (n, 3))
        C0 = _unit_disc(rng, (3, n))
        return _finish(A, Az, B0, C0)

    return _retry_loop(n, seed, build)


def random_symmetric(n: int, seed: int, normalized: bool = False, radius: float = 1.0) -> Realization:
    """Random realization with A_zeta = A* and C0 = B0*, so X0 is Hermitian."""

    def build(rng):
        eA = _disc_eigs(rng, n, radius)
        if normalized:
            eA = eA - np.sum(eA).real / n
        if not _separated(eA, eA.conj()):
            return None
        A = _with_spectrum(rng, eA)
        B0 = _unit_disc(rng, (n, 3))
        r = _finish(A, A.conj().T, B0, B0.conj().T)
        if r is None:
            return None
        # remove the rounding-level anti-Hermitian part of X0
        X0 = (r.X0 + r.X0.conj().T) / 2
        return Realization(r.A, r.A_zeta, X0, r.B0, r.C0, 0.0, 0.0)

    return _retry_loop(n, seed, build)


def trivial(n: int = 1) -> Realization:
    """B0 = 0, A = I, A_zeta = -I, X0 = I: resonant, with vanishing moments."""
    I = np.eye(n)
    return Realization(I, -I, I, np.zeros((n, 3)), np.zeros((3, n)), 0.0, 0.0)


# ---------------------------------------------------------------------------
# file format

_MATRIX_FIELDS = ("A", "A_zeta", "X0", "B0", "C0")
_FIELDS = ("dim",) + _MATRIX_FIELDS + ("x0", "t0")


def _encode(M):
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(M)]


def to_document(r: Realization) -> dict:
    doc = {"dim": r.dim}
    for name in _MATRIX_FIELDS:
        doc[name] = _encode(getattr(r, name))
    doc["x0"] = r.x0
    doc["t0"] = r.t0
    return doc


def dumps(r: Realization) -> str:
    return json.dumps(to_document(r), indent=1) + "\n"


def _is_number(v):
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _decode(name, value, rows, cols):
    if not isinstance(value, list) or len(value) != rows:
        raise SchemaError(f"expected {rows} rows", field=name)
    out = np.empty((rows, cols), dtype=np.complex128)
    for i, row in enumerate(value):
        if not isinstance(row, list) or len(row) != cols:
            raise SchemaError(f"row {i} must hold {cols} entries", field=name)
        for j, z in enumerate(row):
            if not (isinstance(z, list) and len(z) == 2 and all(_is_number(v) for v in z)):
                raise SchemaError(f"entry ({i},{j}) must be a [re, im] pair", field=name)
            out[i, j] = complex(float(z[0]), float(z[1]))
    return out


def from_document(doc) -> Realization:
    if not isinstance(doc, dict):
        raise SchemaError("top level must be an object")
    unknown = sorted(set(doc) - set(_FIELDS))
    if unknown:
        raise SchemaError("unknown field", field=unknown[0])
    for name in _FIELDS:
        if name not in doc:
            raise SchemaError("missing field", field=name)
    n = doc["dim"]
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise SchemaError("dim must be a positive integer", field="dim")
    shapes = {"A": (n, n), "A_zeta": (n, n), "X0": (n, n), "B0": (n, 3), "C0": (3, n)}
    mats = {name: _decode(name, doc[name], *shapes[name]) for name in _MATRIX_FIELDS}
    for name in ("x0", "t0"):
        if not _is_number(doc[name]):
            raise SchemaError("must be a number", field=name)
    try:
        return Realization(**mats, x0=float(doc["x0"]), t0=float(doc["t0"]))
    except MalformedRealization as exc:
        raise SchemaError(str(exc)) from exc


def loads(text: str) -> Realization:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"not a valid document: {exc.msg}", line=exc.lineno) from exc
    return from_document(doc)


def load(path) -> Realization:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise SchemaError(f"file is not UTF-8: {exc}") from exc
    return loads(text)


def save(r: Realization, path) -> None:
    Path(path).write_text(dumps(r), encoding="utf-8")
