"""Local linear navigation: Jacobian estimation, SVD, pseudo-inverse steps.

The design space is treated through its unit-cube normalization, so one step
of navigation is: estimate the Jacobian of the response at a base point by
central differences, factorize it with a one-sided Jacobi SVD, apply the
pseudo-inverse to the desired output change, and clamp the proposed move back
into the cube. Categorical coordinates have no continuous derivative; their
columns are kept as explicit zeros and flagged so callers know the navigator
cannot steer them.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

DEFAULT_STEP = 1e-4
DEFAULT_SIGMA_TOL = 1e-10
MAX_SWEEPS = 10_000


class ConvergenceError(RuntimeError):
    """The Jacobi sweep cap was reached before the off-diagonal mass vanished."""


@dataclass(frozen=True)
class JacobianResult:
    """Central-difference Jacobian at a unit-cube base point."""

    matrix: np.ndarray  # (n_outputs, n_coords)
    x0: np.ndarray
    step: float
    zero_columns: tuple[int, ...]

    def to_dict(self) -> dict:
        return {
            "matrix": self.matrix.tolist(),
            "x0": self.x0.tolist(),
            "step": self.step,
            "zero_columns": list(self.zero_columns),
        }


@dataclass(frozen=True)
class SvdResult:
    """Full singular value decomposition a = u @ diag(s) @ vt."""

    u: np.ndarray  # (m, m)
    s: np.ndarray  # (min(m, n),)
    vt: np.ndarray  # (n, n)
    sweeps: int

    def reconstruct(self) -> np.ndarray:
        m, n = self.u.shape[0], self.vt.shape[0]
        sigma = np.zeros((m, n))
        k = len(self.s)
        sigma[:k, :k] = np.diag(self.s)
        return self.u @ sigma @ self.vt

    def low_rank(self, r: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Leading r triple (u_r, s_r, vt_r); r beyond the spectrum is clipped."""
        r = max(0, min(int(r), len(self.s)))
        return self.u[:, :r], self.s[:r], self.vt[:r, :]

    def to_dict(self) -> dict:
        return {
            "u": self.u.tolist(),
            "singular_values": self.s.tolist(),
            "vt": self.vt.tolist(),
        }


@dataclass(frozen=True)
class PinvResult:
    matrix: np.ndarray  # (n, m)
    rank: int
    degenerate: bool


@dataclass(frozen=True)
class LinearStep:
    """Proposed move in the unit cube toward a target output change."""

    x_new: np.ndarray
    x_raw: np.ndarray
    delta: np.ndarray
    clamped: bool
    rank: int
    degenerate: bool


def simulator_function(model) -> tuple[Callable[[np.ndarray], np.ndarray], tuple[int, ...]]:
    """A ground-truth simulator as a unit-cube map, plus its categorical columns.

    The returned function takes a normalized decision vector and yields the
    performance outputs in declaration order.
    """
    from .space import CATEGORICAL

    space = model.space
    cat = tuple(
        i
        for i, n in enumerate(space.decision_names)
        if space.decision_spec(n).kind == CATEGORICAL
    )
    out_names = space.performance_names

    def func(u: np.ndarray) -> np.ndarray:
        row = space.denormalize(u)
        out = model.evaluate(row)
        return np.array([out[n] for n in out_names])

    return func, cat


def network_function(model) -> tuple[Callable[[np.ndarray], np.ndarray], tuple[int, ...]]:
    """A fitted network as a unit-cube map over its own input variables.

    Continuous coordinates stretch over the fitted bin span; each output is
    the expected bin midpoint under the conditional table. Same call shape as
    simulator_function, so the navigator can steer either.
    """
    from .discretize import ContinuousBins

    names = model.structure.inputs
    bins = [model.scheme.bins(n) for n in names]
    cat = tuple(i for i, b in enumerate(bins) if not isinstance(b, ContinuousBins))
    midpoints = {
        n: np.array(
            [model.scheme.representative(n, b) for b in range(model.scheme.n_bins(n))]
        )
        for n in model.structure.outputs
    }

    def func(u: np.ndarray) -> np.ndarray:
        config = []
        for j, b in enumerate(bins):
            if isinstance(b, ContinuousBins):
                lo, hi = b.edges[0], b.edges[-1]
                config.append(b.to_bin(lo + float(u[j]) * (hi - lo)))
            else:
                k = b.n_bins
                config.append(min(int(float(u[j]) * k), k - 1))
        return np.array(
            [
                float(model.cpt_row(n, config) @ midpoints[n])
                for n in model.structure.outputs
            ]
        )

    return func, cat


def estimate_jacobian(
    func: Callable[[np.ndarray], np.ndarray],
    x0: Sequence[float],
    step: float = DEFAULT_STEP,
    categorical: Sequence[int] = (),
) -> JacobianResult:
    """Estimate d(func)/dx at x0 by central differences, one coordinate at a time.

    x0 lives in the unit cube and must stay at least one step away from every
    face so both probe points remain inside. Coordinates listed in categorical
    are not probed; their columns stay zero and are reported back.
    """
    x0 = np.asarray(x0, dtype=float)
    if step <= 0:
        raise ValueError(f"step must be positive, got {step}")
    bad = [i for i, v in enumerate(x0) if not (step <= v <= 1.0 - step)]
    if bad:
        raise ValueError(
            f"base point must be at least {step} from the cube faces; "
            f"coordinates {bad} are not"
        )
    categorical = tuple(sorted(set(int(i) for i in categorical)))
    for i in categorical:
        if not (0 <= i < len(x0)):
            raise ValueError(f"categorical index {i} outside 0..{len(x0) - 1}")
    f0 = np.asarray(func(x0), dtype=float)
    if f0.ndim != 1:
        raise ValueError("func must return a one-dimensional output vector")
    matrix = np.zeros((len(f0), len(x0)))
    for i in range(len(x0)):
        if i in categorical:
            continue
        hi = x0.copy()
        lo = x0.copy()
        hi[i] += step
        lo[i] -= step
        matrix[:, i] = (np.asarray(func(hi), dtype=float) - np.asarray(func(lo), dtype=float)) / (
            2.0 * step
        )
    return JacobianResult(matrix=matrix, x0=x0, step=step, zero_columns=categorical)


def _complete_basis(columns: np.ndarray, m: int) -> np.ndarray:
    """Extend orthonormal columns to a full m x m orthogonal matrix."""
    basis = [columns[:, j] for j in range(columns.shape[1])]
    for cand_idx in range(m):
        if len(basis) == m:
            break
        v = np.zeros(m)
        v[cand_idx] = 1.0
        for b in basis:
            v = v - (b @ v) * b
        norm = float(np.sqrt(v @ v))
        if norm > 1e-10:
            basis.append(v / norm)
    if len(basis) != m:
        raise ConvergenceError("could not complete an orthonormal basis")
    return np.column_stack(basis)


def jacobi_svd(
    a: np.ndarray, tol: float = 1e-12, max_sweeps: int = MAX_SWEEPS
) -> SvdResult:
    """One-sided Jacobi SVD with full orthogonal factors.

    Columns are rotated pairwise until every pair is numerically orthogonal:
    |b_p . b_q| <= tol * ||b_p|| * ||b_q||. Singular values are the resulting
    column norms, sorted descending. Exceeding max_sweeps raises.
    """
    a = np.atleast_2d(np.asarray(a, dtype=float))
    m, n = a.shape
    if m < n:
        inner = jacobi_svd(a.T, tol=tol, max_sweeps=max_sweeps)
        return SvdResult(
            u=inner.vt.T, s=inner.s, vt=inner.u.T, sweeps=inner.sweeps
        )

    b = a.copy()
    v = np.eye(n)
    sweeps = 0
    for sweep in range(max_sweeps):
        sweeps = sweep + 1
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                alpha = float(b[:, p] @ b[:, p])
                beta = float(b[:, q] @ b[:, q])
                gamma = float(b[:, p] @ b[:, q])
                if alpha == 0.0 or beta == 0.0:
                    continue
                if abs(gamma) <= tol * np.sqrt(alpha * beta):
                    continue
                rotated = True
                zeta = (beta - alpha) / (2.0 * gamma)
                t = np.sign(zeta) / (abs(zeta) + np.sqrt(1.0 + zeta * zeta))
                if zeta == 0.0:
                    t = 1.0
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = c * t
                bp = b[:, p].copy()
                b[:, p] = c * bp - s * b[:, q]
                b[:, q] = s * bp + c * b[:, q]
                vp = v[:, p].copy()
                v[:, p] = c * vp - s * v[:, q]
                v[:, q] = s * vp + c * v[:, q]
        if not rotated:
            break
    else:
        raise ConvergenceError(
            f"column pairs still coupled after {max_sweeps} sweeps"
        )

    norms = np.sqrt(np.einsum("ij,ij->j", b, b))
    order = np.argsort(-norms, kind="stable")
    norms = norms[order]
    b = b[:, order]
    v = v[:, order]
    # descending sort puts zero norms last, so nonzero columns form a prefix
    rank = int(np.count_nonzero(norms > 0))
    keep = b[:, :rank] / norms[:rank]
    u = _complete_basis(keep, m)
    return SvdResult(u=u, s=norms, vt=v.T, sweeps=sweeps)


def pseudo_inverse(
    svd: SvdResult, sigma_tol: float = DEFAULT_SIGMA_TOL
) -> PinvResult:
    """Moore-Penrose inverse from an SVD, with a relative cutoff on the spectrum.

    Singular values at or below sigma_tol times the largest are treated as
    zero. When that discards everything the map is degenerate and the zero
    matrix is returned, flagged.
    """
    s = svd.s
    m = svd.u.shape[0]
    n = svd.vt.shape[0]
    if len(s) == 0 or s[0] <= 0.0:
        return PinvResult(matrix=np.zeros((n, m)), rank=0, degenerate=True)
    keep = s > sigma_tol * s[0]
    rank = int(np.count_nonzero(keep))
    if rank == 0:
        return PinvResult(matrix=np.zeros((n, m)), rank=0, degenerate=True)
    u_r = svd.u[:, :rank]
    vt_r = svd.vt[:rank, :]
    inv = vt_r.T @ (u_r / s[:rank]).T
    return PinvResult(matrix=inv, rank=rank, degenerate=False)


def navigate_linear(
    jacobian: JacobianResult,
    delta_outputs: Sequence[float],
    sigma_tol: float = DEFAULT_SIGMA_TOL,
) -> LinearStep:
    """Minimum-norm unit-cube step that moves the outputs by delta_outputs.

    Solves delta_x = pinv(J) @ delta_outputs and clamps the new point to the
    cube, flagging when clamping changed anything. A fully degenerate Jacobian
    yields the zero step, also flagged.
    """
    delta_outputs = np.asarray(delta_outputs, dtype=float)
    if delta_outputs.shape != (jacobian.matrix.shape[0],):
        raise ValueError(
            f"expected {jacobian.matrix.shape[0]} output deltas, "
            f"got {delta_outputs.shape}"
        )
    svd = jacobi_svd(jacobian.matrix)
    pinv = pseudo_inverse(svd, sigma_tol=sigma_tol)
    delta = pinv.matrix @ delta_outputs
    x_raw = jacobian.x0 + delta
    x_new = np.clip(x_raw, 0.0, 1.0)
    clamped = bool(np.any(x_new != x_raw))
    return LinearStep(
        x_new=x_new,
        x_raw=x_raw,
        delta=delta,
        clamped=clamped,
        rank=pinv.rank,
        degenerate=pinv.degenerate,
    )
