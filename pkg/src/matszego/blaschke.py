"""Matrix Blaschke-Potapov products for point masses off the interval.

A product B(z) = F_1(z) ... F_K(z) of elementary factors

    F_k(z) = U_k* (b_k(z) I_s + (I - I_s)) U_k,
    b_k(z) = (|z_k| / z_k) (z_k - z) / (1 - conj(z_k) z),

one factor per mass point, carrying the disk coordinate z_k and a
prescribed range for B(z_k). Factors are unitary on the circle, so the
product is; det B(0) = prod |z_k|^{s_k} with s_k the b-block rank.

The construction appends factors on the right: given the partial
product B_{k-1} and the target range V_k at z_k, the new factor vanishes
on the orthogonal complement of W = B_{k-1}(z_k)^{-1} V_k, which makes
B_k(z_k) = B_{k-1}(z_k) P_W have range exactly V_k. Full-dimensional
targets impose nothing and are skipped; empty targets give a scalar
factor b_k(z) I.
"""

from __future__ import annotations

import dataclasses
from typing import Callable, Sequence

import numpy as np
import scipy.linalg

from .errors import (
    DegenerateFrame,
    DuplicatePole,
    NotSimplePole,
    PoleAtReflection,
    ValidationError,
)
from .tolerances import DEFAULT, Tolerances


def orthonormal_frame(vectors: np.ndarray, tol: Tolerances = DEFAULT) -> np.ndarray:
    """Orthonormal basis with the span of the given columns.

    Raises DegenerateFrame when the columns are numerically dependent.
    """
    v = np.atleast_2d(np.asarray(vectors, dtype=complex))
    if v.shape[1] == 0:
        return v
    if v.shape[1] > v.shape[0]:
        raise DegenerateFrame(f"{v.shape[1]} columns cannot be independent in dim {v.shape[0]}")
    q, r = np.linalg.qr(v)
    diag = np.abs(np.diag(r))
    if diag.min() <= tol.rank_rel * max(diag.max(), np.abs(v).max(), 1e-300):
        raise DegenerateFrame(f"column set numerically rank deficient (min pivot {diag.min():.3e})")
    return q


def complement_frame(frame: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the orthogonal complement of the columns."""
    if frame.shape[1] == 0:
        return np.eye(frame.shape[0], dtype=complex)
    return scipy.linalg.null_space(frame.conj().T).astype(complex)


def kernel_frame(w: np.ndarray, tol: Tolerances = DEFAULT) -> np.ndarray:
    """Orthonormal basis of the (right) kernel at a relative rank cutoff.

    A numerically zero matrix has full kernel: returns the identity.
    """
    w = np.asarray(w, dtype=complex)
    _, sing, vh = np.linalg.svd(w)
    if sing.size == 0 or sing[0] < 1e-300:
        return np.eye(w.shape[1], dtype=complex)
    small = sing < tol.rank_rel * sing[0]
    return vh[small].conj().T


def principal_angles(f1: np.ndarray, f2: np.ndarray) -> np.ndarray:
    """Principal angles between the column spans, largest first."""
    if f1.shape[1] == 0 or f2.shape[1] == 0:
        if f1.shape[1] == f2.shape[1]:
            return np.zeros(0)
        return np.array([np.pi / 2])
    return scipy.linalg.subspace_angles(f1, f2)


@dataclasses.dataclass(frozen=True)
class ElementaryFactor:
    """One unitary-valued factor; the b-block occupies the leading rank slots."""

    z: complex
    rank: int
    unitary: np.ndarray

    @property
    def dim(self) -> int:
        return self.unitary.shape[0]

    def scalar(self, z) -> np.ndarray:
        """The scalar Blaschke function b(z), positive at the origin."""
        z_arr = np.asarray(z, dtype=complex)
        denom = 1.0 - np.conj(self.z) * z_arr
        if np.any(np.abs(denom) < 1e-14):
            raise PoleAtReflection(
                f"evaluation at the reflected point 1/conj({self.z:.6g})"
            )
        return (abs(self.z) / self.z) * (self.z - z_arr) / denom

    def _assemble(self, b: np.ndarray) -> np.ndarray:
        l, s = self.dim, self.rank
        d = np.ones(b.shape + (l,), dtype=complex)
        d[..., :s] = b[..., None]
        u = self.unitary
        return np.einsum("ji,...j,jk->...ik", u.conj(), d, u)

    def eval(self, z) -> np.ndarray:
        return self._assemble(np.atleast_1d(self.scalar(z)))

    def eval_inverse(self, z) -> np.ndarray:
        return self._assemble(1.0 / np.atleast_1d(self.scalar(z)))


@dataclasses.dataclass(frozen=True)
class BlaschkePotapovProduct:
    factors: tuple[ElementaryFactor, ...]
    dim: int

    @property
    def pole_points(self) -> np.ndarray:
        return np.array([f.z for f in self.factors])

    def eval(self, z) -> np.ndarray:
        """B(z); scalar z gives (l, l), array z gives (len(z), l, l)."""
        z_arr = np.atleast_1d(np.asarray(z, dtype=complex))
        out = np.broadcast_to(
            np.eye(self.dim, dtype=complex), z_arr.shape + (self.dim, self.dim)
        ).copy()
        for f in self.factors:
            out = out @ f.eval(z_arr)
        if np.isscalar(z) or np.asarray(z).ndim == 0:
            return out[0]
        return out

    def eval_inverse(self, z) -> np.ndarray:
        """B(z)^{-1} away from the zero set, via reversed inverted factors."""
        z_arr = np.atleast_1d(np.asarray(z, dtype=complex))
        out = np.broadcast_to(
            np.eye(self.dim, dtype=complex), z_arr.shape + (self.dim, self.dim)
        ).copy()
        for f in reversed(self.factors):
            out = out @ f.eval_inverse(z_arr)
        if np.isscalar(z) or np.asarray(z).ndim == 0:
            return out[0]
        return out

    def value_at_zero(self) -> np.ndarray:
        return self.eval(0.0)

    def det_at_zero(self) -> float:
        """prod |z_k|^{s_k}, the expected |det B(0)|."""
        out = 1.0
        for f in self.factors:
            out *= abs(f.z) ** f.rank
        return out


def construct_product(
    states: Sequence[tuple[complex, np.ndarray]],
    dim: int,
    tol: Tolerances = DEFAULT,
    randomize_frames: np.random.Generator | None = None,
) -> BlaschkePotapovProduct:
    """Product with prescribed ranges: range B(z_k) = span of the k-th frame.

    states holds (z_k, frame) pairs with 0 < |z_k| < 1 and frame an
    (l, d_k) column set, 0 <= d_k <= l. Points are processed sorted by
    (|z|, arg z). randomize_frames, when given, right-multiplies each
    frame by a Haar-random unitary first; the span, hence the product,
    is unchanged, which makes the hook a basis-invariance probe.
    """
    order = sorted(
        range(len(states)),
        key=lambda i: (abs(states[i][0]), np.angle(states[i][0])),
    )
    pts = [complex(states[i][0]) for i in order]
    for i, z in enumerate(pts):
        if not 0.0 < abs(z) < 1.0:
            raise ValidationError(f"pole {z:.6g} outside the punctured open disk")
        for z_prev in pts[:i]:
            if abs(z - z_prev) < 1e-12:
                raise DuplicatePole(f"poles {z_prev:.6g} and {z:.6g} coincide")

    factors: list[ElementaryFactor] = []
    partial = BlaschkePotapovProduct(factors=(), dim=dim)
    for i in order:
        z_k = complex(states[i][0])
        v = np.asarray(states[i][1], dtype=complex).reshape(dim, -1)
        if v.shape[1] > dim:
            raise ValidationError(f"frame at {z_k:.6g} has {v.shape[1]} > {dim} columns")
        if randomize_frames is not None and v.shape[1] > 0:
            g = randomize_frames.standard_normal(
                (v.shape[1], v.shape[1])
            ) + 1j * randomize_frames.standard_normal((v.shape[1], v.shape[1]))
            v = v @ np.linalg.qr(g)[0]
        if v.shape[1] == dim:
            orthonormal_frame(v, tol)  # still reject degenerate input
            continue
        if v.shape[1] == 0:
            unitary = np.eye(dim, dtype=complex)
            rank = dim
        else:
            target = orthonormal_frame(v, tol)
            pulled = np.linalg.solve(partial.eval(z_k), target)
            w = orthonormal_frame(pulled, tol)
            q = np.hstack([complement_frame(w), w])
            unitary = q.conj().T
            rank = dim - w.shape[1]
        factors.append(ElementaryFactor(z=z_k, rank=rank, unitary=unitary))
        partial = BlaschkePotapovProduct(factors=tuple(factors), dim=dim)
    return partial


_CONTOUR_POINTS = 64


def residue_kernel(
    func: Callable[[np.ndarray], np.ndarray],
    pole: complex,
    other_poles: Sequence[complex] = (),
    tol: Tolerances = DEFAULT,
) -> tuple[np.ndarray, np.ndarray]:
    """(residue, kernel frame) of a matrix function at a simple pole.

    The residue comes from a 64-point circular contour of radius
    1e-4 * min(1 - |pole|, distance to other poles). A second-order
    Laurent coefficient visible at two radii raises NotSimplePole. The
    kernel frame collects right singular vectors below
    tol.residue_rank_rel of the top singular value; a numerically zero
    residue yields the identity frame.
    """
    clearance = 1.0 - abs(pole)
    for other in other_poles:
        gap = abs(pole - other)
        if gap > 1e-300:
            clearance = min(clearance, gap)
    if clearance <= 0.0:
        raise ValidationError(f"pole {pole:.6g} not strictly inside the disk")
    eps = 1e-4 * clearance
    phi = 2.0 * np.pi * np.arange(_CONTOUR_POINTS) / _CONTOUR_POINTS
    ring = np.exp(1j * phi)

    samples = {}
    for radius in (eps, eps / 2.0):
        vals = np.asarray(func(pole + radius * ring))
        samples[radius] = vals
    residue = np.mean(samples[eps] * (eps * ring)[:, None, None], axis=0)

    scale = float(np.max(np.abs(samples[eps]))) * eps
    second = {
        radius: float(
            np.max(
                np.abs(
                    np.mean(
                        samples[radius]
                        * (radius**2 * np.exp(2j * phi))[:, None, None],
                        axis=0,
                    )
                )
            )
        )
        for radius in samples
    }
    floor = 1e-6 * max(scale, 1e-300)
    if min(second.values()) > floor:
        raise NotSimplePole(
            f"second-order Laurent content {max(second.values()):.3e} at {pole:.6g}"
        )

    sing_top = float(np.linalg.svd(residue, compute_uv=False)[0])
    if sing_top <= 1e-14 * max(scale, 1e-300):
        return residue, np.eye(residue.shape[0], dtype=complex)
    dummy_tol = dataclasses.replace(tol, rank_rel=tol.residue_rank_rel)
    return residue, kernel_frame(residue, dummy_tol)
