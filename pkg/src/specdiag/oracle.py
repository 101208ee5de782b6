"""Randomized necessity checks on two-sided unitary orbits.

Draws come from Philox4x64-10 keyed by ``(seed, draw_index)``; raw 64-bit
words become uniforms with 53-bit resolution and normals via Box-Muller.
The whole pipeline is therefore fixed by algorithm, and draw ``i`` does not
depend on how many other draws were requested.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dense import DenseMatrix
from .errors import OracleViolation
from .majorization import thompson_prefix_and_final

SLACK = 1e-10


def _normals(seed: int, index: int, count: int) -> np.ndarray:
    bitgen = np.random.Philox(key=np.array([seed, index], dtype=np.uint64))
    pairs = (count + 1) // 2
    raw = bitgen.random_raw(2 * pairs)
    u = (raw >> np.uint64(11)).astype(float) * 2.0**-53
    u1 = 1.0 - u[:pairs]  # in (0, 1]
    u2 = u[pairs:]
    r = np.sqrt(-2.0 * np.log(u1))
    z = np.concatenate([r * np.cos(2 * np.pi * u2), r * np.sin(2 * np.pi * u2)])
    return z[:count]


def _gaussian_stack(n: int, seed: int, indices, complex_: bool) -> np.ndarray:
    k = 2 * n * n if complex_ else n * n
    Z = np.stack([_normals(seed, int(i), k) for i in indices]) if len(indices) else np.zeros((0, k))
    if complex_:
        Z = (Z[:, : n * n] + 1j * Z[:, n * n :]) / np.sqrt(2.0)
    return Z.reshape(-1, n, n)


def haar_batch(n: int, seed: int, indices, complex_: bool = False) -> np.ndarray:
    """Haar-distributed orthogonal (or unitary) matrices, one per draw index.

    QR of a Gaussian matrix, with each column of Q rescaled by the phase of
    the matching diagonal entry of R so the law is exactly invariant.
    """
    Z = _gaussian_stack(n, seed, list(indices), complex_)
    if Z.shape[0] == 0:
        return Z
    Q, R = np.linalg.qr(Z)
    diag = np.diagonal(R, axis1=-2, axis2=-1)
    ph = diag / np.where(np.abs(diag) > 0, np.abs(diag), 1.0)
    ph = np.where(np.abs(diag) > 0, ph, 1.0)
    return Q * ph[:, None, :]


def haar_orthogonal(n: int, seed: int, index: int = 0) -> DenseMatrix:
    if n < 1:
        raise ValueError("n must be positive")
    return DenseMatrix(haar_batch(n, seed, [index], complex_=False)[0])


def haar_unitary(n: int, seed: int, index: int = 0) -> DenseMatrix:
    if n < 1:
        raise ValueError("n must be positive")
    return DenseMatrix(haar_batch(n, seed, [index], complex_=True)[0])


def _fan_gaps(diagonals: np.ndarray, s: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    dm = -np.sort(-np.abs(diagonals), axis=1)
    return thompson_prefix_and_final(dm, np.broadcast_to(s, dm.shape))


@dataclass
class OrbitSample:
    seed: int
    s: list
    diagonals: np.ndarray
    real: bool = False

    def to_json(self) -> dict:
        d = self.diagonals
        if self.real:
            diags = d.real.tolist()
        else:
            diags = [[[z.real, z.imag] for z in row] for row in d.tolist()]
        return {"seed": self.seed, "s": list(self.s), "real": self.real, "diagonals": diags}


def sample_orbit_diagonals(s, trials: int, seed: int, real_flag: bool = False) -> OrbitSample:
    """Diagonals of ``U diag(s) V`` for independent Haar ``U`` (draw 2t) and ``V`` (draw 2t+1)."""
    s = np.asarray(s, dtype=float).ravel()
    if np.any(s < 0) or np.any(np.diff(s) > 0):
        raise ValueError("s must be nonnegative and nonincreasing")
    n = s.size
    if trials <= 0:
        return OrbitSample(seed, s.tolist(), np.zeros((0, n), dtype=float if real_flag else complex), real_flag)
    U = haar_batch(n, seed, range(0, 2 * trials, 2), complex_=not real_flag)
    V = haar_batch(n, seed, range(1, 2 * trials, 2), complex_=not real_flag)
    diagonals = np.einsum("tik,k,tki->ti", U, s, V)
    gaps, _ = _fan_gaps(diagonals, s)
    thr = SLACK * max(1.0, s[0] if n else 0.0)
    if np.any(gaps < -thr):
        raise OracleViolation("sampled diagonal is not weakly majorized by s")
    return OrbitSample(seed, s.tolist(), diagonals, real_flag)


@dataclass
class SweepReport:
    s: list
    trials: int
    seed: int
    violations: int
    min_weak_gap: float
    min_final_gap: float
    min_unitary_slack: float | None

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def necessity_sweep(s, trials: int, seed: int, real_flag: bool = False, slack: float = SLACK) -> SweepReport:
    """Every orbit diagonal must satisfy weak majorization and the final inequality.

    When ``s`` is all ones the unitary-diagonal inequality is checked too.
    The reported minima show how close the samples came to each boundary.
    """
    s = np.asarray(s, dtype=float).ravel()
    sample = sample_orbit_diagonals(s, trials, seed, real_flag)
    d = sample.diagonals
    thr = slack * max(1.0, s[0] if s.size else 0.0)
    if trials <= 0 or s.size == 0:
        return SweepReport(s.tolist(), trials, seed, 0, 0.0, 0.0, None)
    gaps, final = _fan_gaps(d, s)
    bad = (gaps < -thr).any(axis=1) | (final < -thr)
    unitary_slack = None
    if np.all(s == 1.0):
        mod = np.abs(d)
        us = np.sum(1.0 - mod, axis=1) - 2.0 * (1.0 - mod.min(axis=1))
        bad |= (us < -thr) | (mod > 1 + thr).any(axis=1)
        unitary_slack = float(us.min())
    report = SweepReport(s.tolist(), trials, seed, int(bad.sum()), float(gaps.min()), float(final.min()), unitary_slack)
    if report.violations:
        first = int(np.flatnonzero(bad)[0])
        raise OracleViolation(f"{report.violations} violations; first at draw {first}: diagonal {d[first].tolist()}")
    return report
