"""Closed-form predictions for a configured link.

Everything here is derived from the same physics the event-level simulation
samples, so the two can be checked against each other:

* the system timing response is the quadrature sum of the emitter pulse
  width, fibre broadening, detector response at the operating count rate,
  and clock-recovery jitter;
* a Gaussian of that width, shifted by the detector's rate-dependent
  centroid walk, is integrated over the acceptance window of each clock
  period to get the fractions of counts kept, rejected, and mis-filed into
  a neighbouring period;
* count rates follow from Poisson photon statistics, the lossy channel,
  detection efficiency, dark counts, and non-paralyzable dead time.

A count mis-filed into a neighbouring period carries no correlation with
that period's bit, so it is wrong half the time; accepted dark counts
likewise. That is the entire error model, and it reproduces the measured
error rates of a gigahertz-clocked link without any fitted fudge factors.

The count rate used for the detector response lookup is itself a
prediction (per detector, dark counts included, dead time applied), so the
analytic chain needs no iteration: detection rates do not depend on timing,
only the sifting of detections does.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.special import ndtr

from .config import GateSpec, LinkConfig
from .detector import centroid_shift_at, jitter_fwhm_at
from .photonics import FWHM_PER_SIGMA, channel_transmittance, emitter_pulse_fwhm
from .postproc import net_rate


def total_system_fwhm(*component_fwhms_ps: float) -> float:
    """Quadrature sum of any number of Gaussian widths (FWHM in, FWHM out).

    Symmetric in its arguments and homogeneous of degree one; a single
    nonzero component comes back unchanged.
    """
    if not component_fwhms_ps:
        raise ValueError("need at least one component width")
    total = 0.0
    for width in component_fwhms_ps:
        if width < 0:
            raise ValueError("component widths must be non-negative")
        total += width * width
    return math.sqrt(total)


@dataclass(frozen=True)
class TimingBudget:
    """Per-contributor timing widths (all FWHM, ps)."""

    emitter_fwhm_ps: float
    channel_fwhm_ps: float
    detector_fwhm_ps: float
    sync_fwhm_ps: float

    @property
    def total_fwhm_ps(self) -> float:
        return total_system_fwhm(
            self.emitter_fwhm_ps,
            self.channel_fwhm_ps,
            self.detector_fwhm_ps,
            self.sync_fwhm_ps,
        )


@dataclass(frozen=True)
class GateLeakage:
    """How one period's counts split under gating.

    p_own: accepted and filed into the period that produced them.
    p_wrong_slot: accepted but filed into a neighbouring period.
    p_rejected: outside every acceptance window.
    """

    p_own: float
    p_wrong_slot: float
    p_rejected: float


def nonparalyzable_rate(raw_cps: float, dead_time_ns: float) -> float:
    """Registered rate for a Poisson arrival rate and a fixed dead time.

    Non-paralyzable model: raw / (1 + raw * tau). Arrivals during the hold-off
    are dropped without extending it.
    """
    if raw_cps < 0:
        raise ValueError("raw_cps must be non-negative")
    if dead_time_ns < 0:
        raise ValueError("dead_time_ns must be non-negative")
    return raw_cps / (1.0 + raw_cps * dead_time_ns * 1e-9)


def _arm_click_probability(config: LinkConfig) -> float:
    """Chance per slot that one detector fires on signal photons.

    Each arriving photon reaches a given detector with probability 1/2 and
    passes its analyzer with the polarization overlap 1/2, but only the slots
    whose bit matches that arm (half of them) can fire it at all. A pinned
    photon number replaces the Poisson average with the exact binomial
    complement.
    """
    source = config.source
    t = channel_transmittance(config.channel)
    p_one = t * config.detector.efficiency / 4.0
    if source.fixed_photon_count is not None:
        return 0.5 * (1.0 - (1.0 - p_one) ** source.fixed_photon_count)
    return 0.5 * -math.expm1(-source.mean_photon_number * p_one)


def per_arm_detected_cps(config: LinkConfig) -> float:
    """Expected count rate of one detector (cps), darks in, dead time applied.

    This is the operating point for the response-width lookup: the detector
    saturates on what it detects, gated or not.
    """
    raw = config.source.clock_hz * _arm_click_probability(config) + config.detector.dark_cps
    return nonparalyzable_rate(raw, config.detector.dead_time_ns)


def timing_budget(config: LinkConfig, rate_cps: float | None = None) -> TimingBudget:
    """Break down the timing width; rate defaults to the predicted one."""
    if rate_cps is None:
        rate_cps = per_arm_detected_cps(config)
    return TimingBudget(
        emitter_fwhm_ps=emitter_pulse_fwhm(config.source),
        channel_fwhm_ps=config.channel.broadening_fwhm_ps,
        detector_fwhm_ps=jitter_fwhm_at(config.detector, rate_cps),
        sync_fwhm_ps=config.gate.sync_fwhm_ps,
    )


def _clipped_window(k: int, period_ps: float, gate: GateSpec) -> tuple[float, float]:
    """Acceptance interval of period k, clipped to where counts file into k."""
    half_gate = 0.5 * gate.gate_fraction * period_ps
    centre = k * period_ps + gate.window_offset_ps
    lo = max(centre - half_gate, k * period_ps - 0.5 * period_ps)
    hi = min(centre + half_gate, k * period_ps + 0.5 * period_ps)
    return lo, hi


def gate_leakage(
    total_fwhm_ps: float,
    clock_hz: float,
    gate: GateSpec,
    centroid_offset_ps: float = 0.0,
) -> GateLeakage:
    """Split a period's counts into kept / mis-filed / rejected fractions.

    The arrival-time error is a Gaussian of the given FWHM centred on
    centroid_offset_ps. Windows of neighbouring periods are scanned out to
    wherever the Gaussian still has support.
    """
    if total_fwhm_ps < 0:
        raise ValueError("total_fwhm_ps must be non-negative")
    if clock_hz <= 0:
        raise ValueError("clock_hz must be positive")
    period = 1e12 / clock_hz
    sigma = total_fwhm_ps / FWHM_PER_SIGMA

    reach = abs(centroid_offset_ps) + abs(gate.window_offset_ps) + 8.0 * sigma
    k_max = max(2, math.ceil(reach / period) + 1)

    p_own = 0.0
    p_wrong = 0.0
    for k in range(-k_max, k_max + 1):
        lo, hi = _clipped_window(k, period, gate)
        if hi <= lo:
            continue
        if sigma == 0.0:
            mass = 1.0 if lo <= centroid_offset_ps <= hi else 0.0
        else:
            mass = float(
                ndtr((hi - centroid_offset_ps) / sigma)
                - ndtr((lo - centroid_offset_ps) / sigma)
            )
        if k == 0:
            p_own = mass
        else:
            p_wrong += mass
    return GateLeakage(p_own=p_own, p_wrong_slot=p_wrong,
                       p_rejected=max(0.0, 1.0 - p_own - p_wrong))


def _uniform_acceptance(clock_hz: float, gate: GateSpec) -> float:
    """Fraction of uniformly-timed counts (darks) the window accepts."""
    period = 1e12 / clock_hz
    lo, hi = _clipped_window(0, period, gate)
    return max(0.0, hi - lo) / period


@dataclass(frozen=True)
class LinkPrediction:
    """Analytic operating point of one link configuration."""

    per_arm_detected_cps: float
    detected_rate_cps: float
    accepted_signal_cps: float
    accepted_dark_cps: float
    sift_rate_bps: float
    qber: float
    net_rate_bps: float
    centroid_shift_ps: float
    budget: TimingBudget
    leakage: GateLeakage


def analytic_rates(config: LinkConfig) -> LinkPrediction:
    """Predict count rates, sifted rate, QBER, and net key rate."""
    arm_rate = per_arm_detected_cps(config)
    budget = timing_budget(config, arm_rate)
    shift = centroid_shift_at(config.detector, arm_rate)
    leak = gate_leakage(budget.total_fwhm_ps, config.source.clock_hz,
                        config.gate, centroid_offset_ps=shift)

    # Apportion the post-dead-time rate between photons and darks in the
    # same ratio as the raw rates (dead time is blind to the cause).
    source = config.source
    raw_signal = source.clock_hz * _arm_click_probability(config)
    raw_dark = config.detector.dark_cps
    raw = raw_signal + raw_dark
    live = arm_rate / raw if raw > 0 else 0.0
    signal_cps = raw_signal * live
    dark_cps = raw_dark * live

    accepted_signal = signal_cps * (leak.p_own + leak.p_wrong_slot)
    accepted_dark = dark_cps * _uniform_acceptance(source.clock_hz, config.gate)

    sift_per_arm = accepted_signal + accepted_dark
    sift_rate = 2.0 * sift_per_arm
    if sift_per_arm > 0:
        errors = 0.5 * signal_cps * leak.p_wrong_slot + 0.5 * accepted_dark
        qber = errors / sift_per_arm
        net = net_rate(sift_rate, qber, config.security)
    else:
        qber = float("nan")  # nothing reaches the sifter; see analytic_qber
        net = 0.0

    return LinkPrediction(
        per_arm_detected_cps=arm_rate,
        detected_rate_cps=2.0 * arm_rate,
        accepted_signal_cps=2.0 * accepted_signal,
        accepted_dark_cps=2.0 * accepted_dark,
        sift_rate_bps=sift_rate,
        qber=qber,
        net_rate_bps=net,
        centroid_shift_ps=shift,
        budget=budget,
        leakage=leak,
    )


def analytic_qber(config: LinkConfig) -> float:
    """Predicted quantum bit error rate of the sifted key.

    Raises ValueError when the configuration accepts no counts at all (no
    light and no darks): there is no key to have an error rate.
    """
    pred = analytic_rates(config)
    if pred.sift_rate_bps == 0.0:
        raise ValueError("configuration accepts no counts; QBER is undefined")
    return pred.qber
