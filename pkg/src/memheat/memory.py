"""Singular Volterra memory term accumulated along a run.

The ledger stores time-stamped snapshots of |u|^p and evaluates

    int_0^t (t-s)^(-gamma) g(s) ds

by product integration: exact power-kernel moments against the
piecewise-linear interpolant of the snapshots.  Stamps may be nonuniform
(adaptive stepping); weights are recomputed per evaluation time, so there
is no cached-weight state to invalidate.
"""

from __future__ import annotations

import numpy as np

from memheat.core import ValidationError


def _segment_moments(alpha: float, t: float, stamps: np.ndarray):
    """Exact moments of (t-s)^(alpha-1) against the linear hats of each segment.

    Returns per-segment weights (w_left, w_right) for the values at the
    segment endpoints; valid for t >= stamps[-1].
    """
    tl = stamps[:-1]
    tr = stamps[1:]
    dl = t - tl
    dr = t - tr
    p0 = (dl**alpha - dr**alpha) / alpha
    p1 = (dl ** (alpha + 1.0) - dr ** (alpha + 1.0)) / (alpha + 1.0)
    h = tr - tl
    w_left = (p1 - dr * p0) / h
    w_right = (dl * p0 - p1) / h
    return w_left, w_right


class MemoryLedger:
    """Time-stamped history of |u|^p snapshots with singular-kernel quadrature.

    Single-writer: the solver loop appends; evaluation is read-only.
    """

    def __init__(self, gamma: float, shape: tuple[int, ...]):
        if not (0.0 < gamma < 1.0):
            raise ValidationError("gamma must lie in (0,1)")
        self.gamma = gamma
        self.shape = tuple(shape)
        self._times: list[float] = []
        self._store = np.empty((16,) + self.shape)

    def __len__(self) -> int:
        return len(self._times)

    @property
    def times(self) -> np.ndarray:
        return np.asarray(self._times)

    @property
    def snapshots(self) -> np.ndarray:
        return self._store[: len(self._times)]

    def append(self, t: float, power_field: np.ndarray) -> None:
        power_field = np.asarray(power_field, dtype=float)
        if power_field.shape != self.shape:
            raise ValidationError("snapshot shape does not match ledger")
        if self._times and t <= self._times[-1]:
            raise ValidationError("time stamps must be strictly increasing")
        k = len(self._times)
        if k == self._store.shape[0]:
            grown = np.empty((2 * k,) + self.shape)
            grown[:k] = self._store
            self._store = grown
        self._store[k] = power_field
        self._times.append(float(t))

    def accumulate(self, t: float) -> np.ndarray:
        """Memory integral at time t >= the last stamp.

        The integrand is piecewise linear through the stored snapshots and
        extended by its last value on (last stamp, t].  An empty ledger
        yields the zero field.
        """
        k = len(self._times)
        if k == 0:
            return np.zeros(self.shape)
        if t < self._times[-1] - 1e-14:
            raise ValidationError("evaluation time precedes the last stamp")
        stamps = np.asarray(self._times)
        snaps = self.snapshots
        if t > self._times[-1]:
            stamps = np.append(stamps, t)
            snaps = np.concatenate([snaps, snaps[-1:]])
        if stamps.size < 2:
            return np.zeros(self.shape)
        alpha = 1.0 - self.gamma
        w_left, w_right = _segment_moments(alpha, t, stamps)
        return np.tensordot(w_left, snaps[:-1], axes=1) + np.tensordot(
            w_right, snaps[1:], axes=1
        )

    def trim(self, policy: str = "keep-all", ratio: float = 0.5) -> MemoryLedger:
        """Return a ledger under the given retention policy.

        "keep-all" is the identity.  "coarsen-tail" drops alternate interior
        stamps among those older than ratio * (current window); dropping the
        middle node of a pair of segments preserves the piecewise-linear
        integral exactly for data linear in time.
        """
        if policy == "keep-all":
            return self
        if policy != "coarsen-tail":
            raise ValidationError(f"unknown trim policy {policy!r}")
        k = len(self._times)
        if k < 3:
            return self
        times = self.times
        window = times[-1] - times[0]
        age = times[-1] - times
        eligible = age > ratio * window
        keep = np.ones(k, dtype=bool)
        drop_toggle = False
        for j in range(1, k - 1):
            if eligible[j]:
                if drop_toggle:
                    keep[j] = False
                drop_toggle = not drop_toggle
            else:
                drop_toggle = False
        out = MemoryLedger(self.gamma, self.shape)
        for j in np.nonzero(keep)[0]:
            out.append(times[j], self._store[j])
        return out
