"""Joint Gaussian belief over movable-object positions.

Objects are static between manipulations, so there is no prediction step:
the filter is a pure measurement update.  The covariance branch doubles as
the measurement-free map used by the informative planner (the posterior
covariance of a linear-Gaussian observation does not depend on the realized
measurement, only on where it is taken from).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import Shape, segment_blocked

R_FLOOR = 1e-6  # m^2; keeps R invertible where 0.05*p vanishes
SIGMA_KNOWN = 1e-4  # m; near-delta std after grasp/release fixes a position


@dataclass
class GaussianBelief:
    mean: np.ndarray  # (2N,) stacked xy positions
    cov: np.ndarray  # (2N, 2N)

    def __post_init__(self):
        self.mean = np.asarray(self.mean, dtype=float).reshape(-1)
        self.cov = np.asarray(self.cov, dtype=float)
        n = self.mean.size
        if n % 2 != 0:
            raise ValueError("mean must stack xy pairs")
        if self.cov.shape != (n, n):
            raise ValueError("covariance shape mismatch")

    @property
    def n_objects(self) -> int:
        return self.mean.size // 2

    def copy(self) -> "GaussianBelief":
        return GaussianBelief(self.mean.copy(), self.cov.copy())

    def positions(self) -> np.ndarray:
        return self.mean.reshape(-1, 2)

    def marginal(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        """Mean and 2x2 covariance block of object i (1-based)."""
        if not (1 <= i <= self.n_objects):
            raise IndexError(f"object index {i} out of range")
        s = 2 * (i - 1)
        return self.mean[s : s + 2].copy(), self.cov[s : s + 2, s : s + 2].copy()

    def det_marginal(self, i: int) -> float:
        _, sig = self.marginal(i)
        return float(sig[0, 0] * sig[1, 1] - sig[0, 1] * sig[1, 0])

    def set_marginal(self, i: int, mean2, var: float) -> None:
        """Collapse object i to an isotropic marginal, cutting cross terms."""
        s = 2 * (i - 1)
        self.mean[s : s + 2] = np.asarray(mean2, dtype=float)
        self.cov[s : s + 2, :] = 0.0
        self.cov[:, s : s + 2] = 0.0
        self.cov[s, s] = var
        self.cov[s + 1, s + 1] = var


def uncertainty(sigma2: np.ndarray) -> float:
    """det of a 2x2 marginal covariance, in m^4."""
    return float(sigma2[0, 0] * sigma2[1, 1] - sigma2[0, 1] * sigma2[1, 0])


@dataclass
class Measurement:
    """Stacked observation of the visible objects.

    indices are 1-based object ids, ordered ascending; y stacks their xy
    observations; noise_diag holds the matching diagonal of R.
    """

    indices: tuple[int, ...]
    y: np.ndarray
    noise_diag: np.ndarray

    def __post_init__(self):
        self.y = np.asarray(self.y, dtype=float).reshape(-1)
        self.noise_diag = np.asarray(self.noise_diag, dtype=float).reshape(-1)
        if self.y.size != 2 * len(self.indices) or self.noise_diag.size != self.y.size:
            raise ValueError("measurement dimensions inconsistent")
        if len(self.indices) != len(set(self.indices)):
            raise ValueError("duplicate object index")

    @property
    def is_empty(self) -> bool:
        return len(self.indices) == 0

    def selection_matrix(self, n_objects: int) -> np.ndarray:
        m = np.zeros((self.y.size, 2 * n_objects))
        for row, i in enumerate(self.indices):
            s = 2 * (i - 1)
            m[2 * row, s] = 1.0
            m[2 * row + 1, s + 1] = 1.0
        return m


def visible_objects(
    pos, positions, occluders: list[Shape], sensing_range: float
) -> list[int]:
    """1-based indices of objects within range and with clear line of sight."""
    pos = np.asarray(pos, dtype=float)
    pts = np.asarray(positions, dtype=float).reshape(-1, 2)
    out = []
    for idx, q in enumerate(pts, start=1):
        if np.hypot(*(q - pos)) > sensing_range:
            continue
        if segment_blocked(occluders, pos, q):
            continue
        out.append(idx)
    return out


def expected_noise(coords, scale: float = 0.05, floor: float = R_FLOOR) -> np.ndarray:
    """Diagonal of R for the given stacked coordinates: (scale*|p_c|)^2,
    floored to stay invertible at the origin."""
    coords = np.asarray(coords, dtype=float).reshape(-1)
    return np.maximum((scale * np.abs(coords)) ** 2, floor)


def _posterior_cov(cov: np.ndarray, indices, noise_diag: np.ndarray) -> np.ndarray:
    """Information-form covariance update for a block-selection observation."""
    info = np.linalg.inv(cov)
    for row, i in enumerate(indices):
        s = 2 * (i - 1)
        info[s, s] += 1.0 / noise_diag[2 * row]
        info[s + 1, s + 1] += 1.0 / noise_diag[2 * row + 1]
    post = np.linalg.inv(info)
    return 0.5 * (post + post.T)


def kf_update(belief: GaussianBelief, meas: Measurement) -> GaussianBelief:
    """Measurement update; no prediction step (static objects)."""
    if meas.is_empty:
        return belief.copy()
    if np.any(meas.noise_diag <= 0):
        raise np.linalg.LinAlgError("singular measurement noise")
    n = belief.n_objects
    for i in meas.indices:
        if not (1 <= i <= n):
            raise ValueError(f"measured object {i} out of range")
    post_cov = _posterior_cov(belief.cov, meas.indices, meas.noise_diag)
    m = meas.selection_matrix(n)
    gain = post_cov @ m.T @ np.diag(1.0 / meas.noise_diag)
    innovation = meas.y - m @ belief.mean
    post_mean = belief.mean + gain @ innovation
    return GaussianBelief(post_mean, post_cov)


def riccati(
    cov: np.ndarray,
    waypoint,
    est_positions,
    occluders: list[Shape],
    sensing_range: float,
    noise_scale: float = 0.05,
    noise_floor: float = R_FLOOR,
) -> np.ndarray:
    """Measurement-free covariance map: the posterior covariance the filter
    would reach after observing from `waypoint`, with visibility judged
    against the estimated positions and the map snapshot."""
    vis = visible_objects(waypoint, est_positions, occluders, sensing_range)
    if not vis:
        return np.array(cov, dtype=float, copy=True)
    est = np.asarray(est_positions, dtype=float).reshape(-1, 2)
    coords = np.concatenate([est[i - 1] for i in vis])
    noise_diag = expected_noise(coords, noise_scale, noise_floor)
    return _posterior_cov(np.asarray(cov, dtype=float), vis, noise_diag)


def is_psd(cov: np.ndarray, tol: float = 1e-12) -> bool:
    sym = 0.5 * (cov + cov.T)
    return bool(np.all(np.linalg.eigvalsh(sym) >= -tol))
