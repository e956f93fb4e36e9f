"""Single-photon detector response: rate-dependent jitter, dead time, darks.

Actively quenched silicon avalanche photodiodes do not have a fixed timing
response. As the incident count rate climbs, carriers from previous
avalanches distort the bias recovery and the instrument response both
broadens and walks: its FWHM grows and its centroid slides later relative to
the true arrival. Both effects are captured here by a per-module table of
(count rate, FWHM) anchors with log-rate linear interpolation, plus a
centroid model tied to the same table.

Two module characterizations ship as built-ins:

* "standard": a stock thick-junction counting module. 570 ps FWHM at low
  rates, rising to 950 ps at 2 Mcounts/s, with most of the rise above a
  ~0.5 Mcounts/s onset. Its centroid walks by half the broadening
  (centroid_alpha = 0.5).
* "enhanced": the same diode driven by a reworked quenching front end that
  suppresses the rate dependence: 370 ps at low rates, 450 ps at
  2 Mcounts/s, and no measurable centroid walk (centroid_alpha = 0).

Dead time is non-paralyzable: after each registered event the detector is
blind for dead_time_ns and blind-interval arrivals do not retrigger it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .photonics import FWHM_PER_SIGMA, PICO


@dataclass(frozen=True)
class DetectorProfile:
    """One detector module's empirical characterization.

    jitter_rates_cps/jitter_fwhms_ps tabulate the instrument response FWHM
    against detected count rate; lookups interpolate linearly in log10(rate)
    and clamp to the end values outside the table. centroid_alpha scales the
    centroid walk: shift(rate) = alpha * (fwhm(rate) - fwhm(low-rate end)).

    tail_fraction > 0 swaps that fraction of response samples from the
    Gaussian onto a late exponential tail of scale tail_tau_ps (carrier
    diffusion tail); both built-ins leave it at zero.
    """

    name: str
    efficiency: float = 0.45
    dark_cps: float = 250.0
    dead_time_ns: float = 50.0
    jitter_rates_cps: tuple[float, ...] = (1e3, 2e6)
    jitter_fwhms_ps: tuple[float, ...] = (570.0, 950.0)
    centroid_alpha: float = 0.5
    tail_fraction: float = 0.0
    tail_tau_ps: float = 300.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.efficiency <= 1.0:
            raise ValueError("efficiency must be in [0, 1]")
        if self.dark_cps < 0:
            raise ValueError("dark_cps must be non-negative")
        if self.dead_time_ns < 0:
            raise ValueError("dead_time_ns must be non-negative")
        if len(self.jitter_rates_cps) < 2:
            raise ValueError("jitter table needs at least 2 entries")
        if len(self.jitter_rates_cps) != len(self.jitter_fwhms_ps):
            raise ValueError("jitter table rate/fwhm lengths differ")
        rates = self.jitter_rates_cps
        if any(r2 <= r1 for r1, r2 in zip(rates, rates[1:])):
            raise ValueError("jitter_rates_cps must be strictly increasing")
        if any(r <= 0 for r in rates):
            raise ValueError("jitter_rates_cps must be positive")
        if any(f <= 0 for f in self.jitter_fwhms_ps):
            raise ValueError("jitter_fwhms_ps must be positive")
        if not 0.0 <= self.tail_fraction <= 1.0:
            raise ValueError("tail_fraction must be in [0, 1]")
        if self.tail_fraction > 0 and self.tail_tau_ps <= 0:
            raise ValueError("tail_tau_ps must be positive when tail_fraction > 0")
        if self.centroid_alpha < 0:
            raise ValueError("centroid_alpha must be non-negative")

    @property
    def jitter_table(self) -> tuple[tuple[float, float], ...]:
        """The (rate_cps, fwhm_ps) anchor pairs as one ordered table."""
        return tuple(zip(self.jitter_rates_cps, self.jitter_fwhms_ps))


BUILTIN_PROFILES: dict[str, DetectorProfile] = {
    "standard": DetectorProfile(
        name="standard",
        jitter_rates_cps=(1e3, 5e5, 2e6),
        jitter_fwhms_ps=(570.0, 670.0, 950.0),
        centroid_alpha=0.5,
    ),
    "enhanced": DetectorProfile(
        name="enhanced",
        jitter_rates_cps=(1e3, 5e5, 2e6),
        jitter_fwhms_ps=(370.0, 375.0, 450.0),
        centroid_alpha=0.0,
    ),
}


def get_profile(name: str) -> DetectorProfile:
    try:
        return BUILTIN_PROFILES[name]
    except KeyError:
        raise ValueError(
            f"unknown detector profile {name!r}; built-ins: "
            + ", ".join(sorted(BUILTIN_PROFILES))
        ) from None


@dataclass(frozen=True)
class DetectionEvent:
    """One registered click: which analyzer arm, when, and why.

    The origin tag is ground truth for diagnostics; nothing downstream of
    the detector is allowed to branch on it.
    """

    detector_id: int
    timestamp_ps: float
    origin: str = "signal"

    def __post_init__(self) -> None:
        if self.origin not in ("signal", "dark"):
            raise ValueError("origin must be 'signal' or 'dark'")
        if self.timestamp_ps < 0:
            raise ValueError("timestamp_ps must be non-negative")


def jitter_fwhm_at(profile: DetectorProfile, rate_cps: float) -> float:
    """Instrument response FWHM (ps) at a detected count rate.

    Linear in log10(rate) between table anchors, clamped to the end values
    outside the tabulated range (so rate -> 0 returns the low-rate FWHM).
    """
    if rate_cps < 0:
        raise ValueError("rate_cps must be non-negative")
    rates = np.asarray(profile.jitter_rates_cps)
    fwhms = np.asarray(profile.jitter_fwhms_ps)
    if rate_cps <= rates[0]:
        return float(fwhms[0])
    if rate_cps >= rates[-1]:
        return float(fwhms[-1])
    return float(np.interp(math.log10(rate_cps), np.log10(rates), fwhms))


def centroid_shift_at(profile: DetectorProfile, rate_cps: float) -> float:
    """Response centroid walk (ps, positive = late) at a detected rate.

    Modeled as centroid_alpha times the FWHM growth over the low-rate
    response; zero at low rates by construction, and identically zero for
    modules with centroid_alpha = 0.
    """
    low = profile.jitter_fwhms_ps[0]
    return profile.centroid_alpha * (jitter_fwhm_at(profile, rate_cps) - low)


def sample_response_time(
    profile: DetectorProfile,
    rate_cps: float,
    true_arrival_ps,
    rng: np.random.Generator,
):
    """Draw recorded timestamps for photons truly arriving at true_arrival_ps.

    recorded = true + centroid_shift(rate) + jitter, where jitter is a
    zero-mean Gaussian of the rate-indexed FWHM; with probability
    tail_fraction the Gaussian deviate is replaced by a late exponential of
    scale tail_tau_ps. Accepts scalars or arrays.
    """
    arrivals = np.atleast_1d(np.asarray(true_arrival_ps, dtype=np.float64))
    sigma = jitter_fwhm_at(profile, rate_cps) / FWHM_PER_SIGMA
    shift = centroid_shift_at(profile, rate_cps)
    out = arrivals + shift + rng.normal(0.0, sigma, arrivals.shape)
    if profile.tail_fraction > 0.0:
        on_tail = rng.random(arrivals.shape) < profile.tail_fraction
        n_tail = int(on_tail.sum())
        if n_tail:
            out[on_tail] = arrivals[on_tail] + shift + rng.exponential(
                profile.tail_tau_ps, n_tail
            )
    if np.isscalar(true_arrival_ps):
        return float(out[0])
    return out


def click_probability(pol_deg, analyzer_deg, efficiency: float):
    """Malus-law click probability efficiency * cos^2(pol - analyzer).

    An analyzer orthogonal to the launch polarization never clicks; that
    extinction is what makes a click at the right analyzer conclusive.
    Accepts scalars or arrays (degrees).
    """
    if not 0.0 <= efficiency <= 1.0:
        raise ValueError("efficiency must be in [0, 1]")
    delta = np.deg2rad(np.asarray(pol_deg, dtype=np.float64) - np.asarray(analyzer_deg))
    return efficiency * np.cos(delta) ** 2


def dead_time_mask(timestamps_ps: np.ndarray, dead_time_ns: float) -> np.ndarray:
    """Boolean keep-mask for a sorted timestamp stream under dead time.

    Non-paralyzable: the first event is kept, every event within
    dead_time_ns after a *kept* event is dropped and does not extend the
    blind interval.
    """
    t = np.asarray(timestamps_ps, dtype=np.float64)
    if t.ndim != 1:
        raise ValueError("timestamps must be a 1-d array")
    if t.size > 1 and np.any(np.diff(t) < 0):
        raise ValueError("timestamps must be sorted ascending")
    keep = np.zeros(t.size, dtype=bool)
    if t.size == 0:
        return keep
    if dead_time_ns == 0:
        keep[:] = True
        return keep
    dead_ps = dead_time_ns * 1e3
    i = 0
    n = t.size
    while i < n:
        keep[i] = True
        # next candidate is the first arrival past the blind window
        i = int(np.searchsorted(t, t[i] + dead_ps, side="right"))
    return keep


def apply_dead_time(
    events: list[DetectionEvent], dead_time_ns: float
) -> list[DetectionEvent]:
    """Filter a time-ordered event list through non-paralyzable dead time.

    Each detector holds off independently: an event is kept iff at least
    dead_time_ns has passed since the last kept event on the same detector.
    The input must be sorted by timestamp (mixing detectors is fine).
    """
    if not events:
        return []
    times = np.array([e.timestamp_ps for e in events])
    ids = np.array([e.detector_id for e in events])
    if np.any(np.diff(times) < 0):
        raise ValueError("events must be sorted by timestamp_ps")
    kept = np.zeros(len(events), dtype=bool)
    for det in np.unique(ids):
        sel = np.nonzero(ids == det)[0]
        kept[sel] = dead_time_mask(times[sel], dead_time_ns)
    return [e for e, k in zip(events, kept) if k]


def generate_dark_counts(
    dark_cps: float,
    duration_ps: float,
    rng: np.random.Generator,
    detector_id: int = 0,
) -> list[DetectionEvent]:
    """Dark counts on one detector over [0, duration_ps), time-ordered.

    Homogeneous Poisson process: the count is Poisson(rate * duration) and
    arrivals are uniform given the count.
    """
    if dark_cps < 0:
        raise ValueError("dark_cps must be non-negative")
    if duration_ps < 0:
        raise ValueError("duration_ps must be non-negative")
    n = rng.poisson(dark_cps * duration_ps * PICO)
    times = rng.uniform(0.0, duration_ps, n)
    times.sort()
    return [DetectionEvent(detector_id, float(t), origin="dark") for t in times]
