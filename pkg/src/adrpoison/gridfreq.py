"""Single-machine frequency surrogate for incentive-tampering studies.

One equivalent generator with inertia ``H``, load damping ``D`` and a
first-order speed governor (droop ``R``, time constant ``Tg``)::

    2H d(df)/dt = dPm - dPe - D df
    Tg d(dPm)/dt = -df / R - dPm

Load steps ``dPe`` are given in MW and converted to per unit on ``base_mva``.
Integration is classical fixed-step RK4.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import InvalidInputError, InvalidParameterError
from .model import BetaParams


@dataclass(frozen=True)
class GridParams:
    base_mva: float = 13.4
    inertia_h: float = 4.0
    damping_d: float = 1.0
    droop_r: float = 0.05
    governor_tc: float = 0.5
    nominal_freq: float = 1.0

    def __post_init__(self):
        for name in ("base_mva", "inertia_h", "droop_r", "governor_tc"):
            if not getattr(self, name) > 0:
                raise InvalidParameterError(f"{name} must be > 0")
        if self.damping_d < 0:
            raise InvalidParameterError("damping_d must be >= 0")

    def steady_state_deviation(self, step_pu: float) -> float:
        """Droop steady state for a load step of ``step_pu``."""
        return -step_pu / (self.damping_d + 1.0 / self.droop_r)


@dataclass(frozen=True)
class RelayThresholds:
    under: float = 0.9916
    over: float = 1.0083

    def __post_init__(self):
        if not self.under < 1.0 < self.over:
            raise InvalidParameterError("thresholds must bracket 1.0 p.u.")


@dataclass
class FrequencyTrace:
    time: np.ndarray
    freq: np.ndarray
    trips: list = field(default_factory=list)

    @property
    def extremes(self) -> tuple:
        return float(self.freq.min()), float(self.freq.max())

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["time_s", "freq_pu"])
            for t, f in zip(self.time, self.freq):
                w.writerow([f"{t:.9g}", f"{f:.9g}"])


def simulate_frequency(params: GridParams, load_steps: Sequence, duration: float = 30.0,
                       dt: float = 0.01, thresholds: RelayThresholds | None = None) -> FrequencyTrace:
    """Integrate the surrogate under piecewise-constant load steps ``[(t_s, dP_MW), ...]``."""
    steps = [(float(t), float(p)) for t, p in load_steps]
    if any(b[0] < a[0] for a, b in zip(steps, steps[1:])):
        raise InvalidInputError("load steps must be sorted by time")
    if dt <= 0 or duration <= 0:
        raise InvalidParameterError("dt and duration must be > 0")
    n = int(round(duration / dt))
    time = np.arange(n + 1) * dt
    times = np.array([s[0] for s in steps])
    cum = np.cumsum([s[1] for s in steps]) / params.base_mva if steps else np.zeros(0)

    two_h, d, r, tg = 2.0 * params.inertia_h, params.damping_d, params.droop_r, params.governor_tc

    def rhs(y, pe):
        df, pm = y
        return np.array([(pm - pe - d * df) / two_h, (-df / r - pm) / tg])

    y = np.zeros(2)
    out = np.empty(n + 1)
    out[0] = 0.0
    for k in range(n):
        # a step at time t applies from t onwards; load is held over each RK4 interval
        i = np.searchsorted(times, time[k] + 1e-12, side="right")
        pe = cum[i - 1] if i > 0 else 0.0
        k1 = rhs(y, pe)
        k2 = rhs(y + 0.5 * dt * k1, pe)
        k3 = rhs(y + 0.5 * dt * k2, pe)
        k4 = rhs(y + dt * k3, pe)
        y = y + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        out[k + 1] = y[0]
    trace = FrequencyTrace(time, params.nominal_freq + out)
    trace.trips = relay_check(trace, thresholds or RelayThresholds())
    return trace


def relay_check(trace: FrequencyTrace, thresholds: RelayThresholds | None = None) -> list:
    """First crossing of each relay setting, as ``[(time_s, 'under' | 'over'), ...]`` in time order."""
    thr = thresholds or RelayThresholds()
    trips = []
    below = np.flatnonzero(trace.freq < thr.under)
    above = np.flatnonzero(trace.freq > thr.over)
    if below.size:
        trips.append((float(trace.time[below[0]]), "under"))
    if above.size:
        trips.append((float(trace.time[above[0]]), "over"))
    return sorted(trips)


def window_curtailment(betas: Sequence[BetaParams], lam: float, x_max) -> float:
    """Total clipped curtailment (kW) at incentive ``lam``."""
    b1 = np.array([b.beta1 for b in betas])
    b0 = np.array([b.beta0 for b in betas])
    return float(np.sum(np.clip(b1 * lam + b0, 0.0, np.broadcast_to(x_max, b1.shape))))


def attack_demand_profile(baseline_mw, betas: Sequence[BetaParams], lambda_benign: float,
                          lambda_factor: float, window: tuple, x_max=50.0) -> np.ndarray:
    """Hourly demand (MW) when the broadcast incentive is scaled by ``lambda_factor`` in ``window``.

    ``window`` is a half-open hour range ``(start, end)``; curtailments are kW.
    """
    baseline = np.asarray(baseline_mw, dtype=float)
    start, end = int(window[0]), int(window[1])
    if not 0 <= start < end <= baseline.size:
        raise InvalidInputError(f"window {window} outside a {baseline.size}-hour profile")
    if not lambda_factor > 0:
        raise InvalidParameterError("lambda_factor must be > 0")
    if lambda_benign < 0:
        raise InvalidParameterError("incentive must be >= 0")
    cut_mw = window_curtailment(betas, lambda_factor * lambda_benign, x_max) / 1000.0
    out = baseline.copy()
    out[start:end] -= cut_mw
    return out


def baseline_profile(peak_mw: float = 11.5, hours: int = 24) -> np.ndarray:
    """Smooth commercial-campus load shape peaking mid-afternoon."""
    h = np.arange(hours)
    shape = 0.6 + 0.4 * np.exp(-0.5 * ((h - 14.0) / 4.0) ** 2)
    return peak_mw * shape
