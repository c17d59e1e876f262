"""Finite-dimensional complex spaces and matrices.

Rows and columns follow the canonical element order of the target and source
shapes.  Equality and the isometry predicates hold up to a tolerance.
"""

from __future__ import annotations

from typing import Mapping

import numpy as np

from .category import (
    Backend,
    Elem,
    ObjShape,
    OneO,
    ProdO,
    SumO,
    dim,
    elem_index,
    enumerate_elems,
    render_elem,
    render_shape,
    shape_json,
)
from .errors import IncompatibleError, ShapeMismatch

DEFAULT_TOL = 1e-9


class CMatrix:
    __slots__ = ("src", "dst", "m")

    def __init__(self, src: ObjShape, dst: ObjShape, m: np.ndarray):
        m = np.asarray(m, dtype=np.complex128)
        if m.shape != (dim(dst), dim(src)):
            raise ShapeMismatch(
                f"matrix of shape {m.shape} does not fit {render_shape(src)} → {render_shape(dst)}"
            )
        if not np.all(np.isfinite(m)):
            raise ValueError("matrix entries must be finite")
        self.src = src
        self.dst = dst
        self.m = m

    def __repr__(self) -> str:
        return f"CMatrix({render_shape(self.src)} → {render_shape(self.dst)}, {self.m.shape})"


def _same(a: ObjShape, b: ObjShape, what: str) -> None:
    if a != b:
        raise ShapeMismatch(f"{what}: {render_shape(a)} vs {render_shape(b)}")


def direct_sum(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    out = np.zeros((a.shape[0] + b.shape[0], a.shape[1] + b.shape[1]), dtype=np.complex128)
    out[: a.shape[0], : a.shape[1]] = a
    out[a.shape[0]:, a.shape[1]:] = b
    return out


class HilbBackend(Backend):
    name = "hilb"

    def __init__(self, tol: float = DEFAULT_TOL):
        if not tol > 0:
            raise ValueError("tolerance must be positive")
        self.tol = tol

    def src(self, f: CMatrix) -> ObjShape:
        return f.src

    def dst(self, f: CMatrix) -> ObjShape:
        return f.dst

    def identity(self, s: ObjShape) -> CMatrix:
        return CMatrix(s, s, np.eye(dim(s), dtype=np.complex128))

    def compose(self, g: CMatrix, f: CMatrix) -> CMatrix:
        _same(f.dst, g.src, "compose")
        return CMatrix(f.src, g.dst, g.m @ f.m)

    def dagger(self, f: CMatrix) -> CMatrix:
        return CMatrix(f.dst, f.src, f.m.conj().T)

    def tensor_prod(self, f: CMatrix, g: CMatrix) -> CMatrix:
        # left-major pair enumeration is exactly the Kronecker ordering
        return CMatrix(ProdO(f.src, g.src), ProdO(f.dst, g.dst), np.kron(f.m, g.m))

    def tensor_sum(self, f: CMatrix, g: CMatrix) -> CMatrix:
        return CMatrix(SumO(f.src, g.src), SumO(f.dst, g.dst), direct_sum(f.m, g.m))

    def zero_mor(self, src: ObjShape, dst: ObjShape) -> CMatrix:
        return CMatrix(src, dst, np.zeros((dim(dst), dim(src)), dtype=np.complex128))

    def lift(self, src: ObjShape, dst: ObjShape, mapping: Mapping[Elem, Elem]) -> CMatrix:
        m = np.zeros((dim(dst), dim(src)), dtype=np.complex128)
        si, di = elem_index(src), elem_index(dst)
        for a, b in mapping.items():
            m[di[b], si[a]] = 1.0
        return CMatrix(src, dst, m)

    def point(self, s: ObjShape, e: Elem) -> CMatrix:
        m = np.zeros((dim(s), 1), dtype=np.complex128)
        m[elem_index(s)[e], 0] = 1.0
        return CMatrix(OneO(), s, m)

    def is_zero(self, f: CMatrix) -> bool:
        return f.m.size == 0 or float(np.max(np.abs(f.m))) <= self.tol

    def violation(self, f: CMatrix, g: CMatrix) -> tuple[str, float, tuple[int, int]] | None:
        """Largest entry of ``f†g`` or ``fg†`` above tolerance, if any."""
        _same(f.src, g.src, "join source")
        _same(f.dst, g.dst, "join target")
        worst = None
        for label, prod in (("f†g", f.m.conj().T @ g.m), ("fg†", f.m @ g.m.conj().T)):
            if prod.size == 0:
                continue
            idx = np.unravel_index(int(np.argmax(np.abs(prod))), prod.shape)
            mag = float(abs(prod[idx]))
            if mag > self.tol and (worst is None or mag > worst[1]):
                worst = (label, mag, (int(idx[0]), int(idx[1])))
        return worst

    def compatible(self, f: CMatrix, g: CMatrix) -> bool:
        return self.violation(f, g) is None

    def join(self, f: CMatrix, g: CMatrix) -> CMatrix:
        bad = self.violation(f, g)
        if bad is not None:
            label, mag, (i, j) = bad
            raise IncompatibleError(
                f"join incompatible: |{label}[{i},{j}]| = {mag:.3e} exceeds {self.tol:g}",
                witness=bad,
            )
        return CMatrix(f.src, f.dst, f.m + g.m)

    def eq(self, f: CMatrix, g: CMatrix) -> bool:
        if f.src != g.src or f.dst != g.dst:
            return False
        if f.m.size == 0:
            return True
        return float(np.max(np.abs(f.m - g.m))) <= self.tol

    def to_json(self, f: CMatrix) -> dict:
        return {
            "backend": "hilb",
            "src": shape_json(f.src),
            "dst": shape_json(f.dst),
            "rows": [render_elem(e) for e in enumerate_elems(f.dst)],
            "cols": [render_elem(e) for e in enumerate_elems(f.src)],
            "matrix": [
                [[_clean(z.real), _clean(z.imag)] for z in row] for row in f.m
            ],
        }


def _clean(x: float) -> float:
    # fixed rounding keeps dumps byte-stable across BLAS summation orders
    r = round(float(x), 12)
    return 0.0 if r == 0 else r


def hadamard() -> np.ndarray:
    return np.array([[1, 1], [1, -1]], dtype=np.complex128) / np.sqrt(2)


def principal_sqrt(u: np.ndarray, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Principal square root of a normal matrix.

    Eigenphases are taken in (-π, π]; a phase within ``tol`` of -π is read as
    +π so that the branch cut does not flip the result on rounding noise.
    """
    if u.size == 0:
        return u.copy()
    if np.allclose(u, np.diag(np.diag(u)), atol=tol):
        vals, vecs = np.diag(u).copy(), np.eye(u.shape[0], dtype=np.complex128)
    else:
        vals, vecs = np.linalg.eig(u)
    roots = []
    for z in vals:
        r, phi = abs(z), float(np.angle(z))
        if phi <= -np.pi + tol:
            phi = np.pi
        roots.append(np.sqrt(r) * np.exp(0.5j * phi))
    return vecs @ np.diag(roots) @ np.linalg.inv(vecs)
