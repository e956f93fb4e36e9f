"""Package-level acceptance gates, one test per criterion.

Each test prints a single PASS/FAIL verdict line (visible with pytest -s;
the pytest outcome itself mirrors it either way). The expensive artifacts,
the fit and the two sweep tables, are module fixtures shared downstream.
"""

import math
import time

import numpy as np
import pytest

from b92sim.analytics import analytic_rates
from b92sim.calibrate import (
    DEFAULT_ANCHORS,
    CalibrationAnchor,
    anchor_config,
    calibrate,
)
from b92sim.config import GateSpec, LinkConfig, default_config
from b92sim.detector import DetectorProfile, get_profile, sample_response_time
from b92sim.photonics import ChannelSpec, SourceSpec
from b92sim.postproc import binary_entropy, net_rate, privacy_amplify, reconcile
from b92sim.protocol import run_link
from b92sim.sweep import SweepSpec, preset_fig2, preset_fig3, rows_to_csv, run_sweep

POOL_TRIALS = 25
POOL_SLOTS = 16_000_000


def _verdict(num: int, ok: bool, detail: str) -> None:
    print(f"criterion {num:2d}: {'PASS' if ok else 'FAIL'} ({detail})")
    assert ok, f"criterion {num}: {detail}"


@pytest.fixture(scope="module")
def fitted():
    return calibrate(default_config())


@pytest.fixture(scope="module")
def anchor_pool(fitted):
    """Pooled Monte Carlo QBER at each anchor with the fitted config."""
    pooled = {}
    for anchor in DEFAULT_ANCHORS:
        cfg = anchor_config(fitted.config, anchor)
        bits = errors = 0
        sift = []
        for trial in range(POOL_TRIALS):
            summary, _, _ = run_link(cfg, POOL_SLOTS, seed=1000 + trial)
            bits += summary.sifted_bits
            errors += summary.error_bits
            sift.append(summary.sift_rate_bps)
        q = errors / bits
        pooled[anchor.profile] = {
            "qber": q,
            "sigma": math.sqrt(q * (1.0 - q) / bits),
            "bits": bits,
            "sift_rate_bps": float(np.mean(sift)),
        }
    return pooled


@pytest.fixture(scope="module")
def fig2_rows(fitted):
    import dataclasses

    spec = dataclasses.replace(preset_fig2(fitted.config), target_sifted_bits=3000)
    return run_sweep(spec, workers=4)


@pytest.fixture(scope="module")
def fig3_rows(fitted):
    import dataclasses

    spec = dataclasses.replace(preset_fig3(fitted.config), target_sifted_bits=6000)
    return run_sweep(spec, workers=4)


def test_criterion_01_anchor_reproduction(fitted, anchor_pool):
    # Enhanced 0.066 +- 0.015 and standard 0.178 +- 0.025 from one fitted
    # config; a 2e6-slot point must simulate in under a minute.
    t0 = time.perf_counter()
    run_link(anchor_config(fitted.config, DEFAULT_ANCHORS[0]), 2_000_000, seed=3)
    point_s = time.perf_counter() - t0
    q_std = anchor_pool["standard"]["qber"]
    q_enh = anchor_pool["enhanced"]["qber"]
    ok = (
        fitted.converged
        and abs(q_enh - 0.066) <= 0.015
        and abs(q_std - 0.178) <= 0.025
        and point_s <= 60.0
    )
    _verdict(
        1,
        ok,
        f"std {q_std:.4f} (target 0.178 +- 0.025), "
        f"enh {q_enh:.4f} (target 0.066 +- 0.015), "
        f"2e6-slot point {point_s:.2f} s",
    )


def test_criterion_02_error_vs_clock_trend(fig2_rows):
    # 1 to 2 GHz at 6.55 km: enhanced below standard everywhere, enhanced
    # under 10% everywhere, standard above 10% at 2 GHz.
    by_point = {(r.axis_value, r.profile): r for r in fig2_rows}
    clocks = sorted({r.axis_value for r in fig2_rows})
    ok = True
    worst = ""
    for clock in clocks:
        std = by_point[(clock, "standard")]
        enh = by_point[(clock, "enhanced")]
        if not (enh.qber < std.qber and enh.qber < 0.10):
            ok = False
            worst = f"violation at {clock/1e9:.1f} GHz"
    std_2ghz = by_point[(2.0e9, "standard")]
    if std_2ghz.qber <= 0.10:
        ok = False
        worst = f"standard at 2 GHz is {std_2ghz.qber:.4f}"
    enh_2ghz = by_point[(2.0e9, "enhanced")]
    _verdict(
        2,
        ok,
        worst
        or f"enh < std at all {len(clocks)} clocks, enh max "
        f"{max(by_point[(c, 'enhanced')].qber for c in clocks):.4f} < 0.10, "
        f"std at 2 GHz {std_2ghz.qber:.4f} > 0.10 (enh {enh_2ghz.qber:.4f})",
    )


def test_criterion_03_error_vs_length_trends(fig3_rows):
    # At 2 GHz: enhanced fibre error non-decreasing beyond 2 km; standard
    # error higher at 0.1 km than at 2 km; removing dispersion (attenuator
    # mode) never raises the error, all within 3 sigma.
    def row(length, profile, mode):
        for r in fig3_rows:
            if (r.axis_value, r.profile, r.channel_mode) == (length, profile, mode):
                return r
        raise KeyError((length, profile, mode))

    ok = True
    notes = []

    far = [row(L, "enhanced", "fiber") for L in (2.0, 4.2, 6.55, 10.0, 15.0)]
    for a, b in zip(far, far[1:]):
        slack = 3.0 * math.hypot(a.qber_err, b.qber_err)
        if b.qber < a.qber - slack:
            ok = False
            notes.append(f"enhanced drops {a.axis_value} -> {b.axis_value} km")

    std_short = row(0.1, "standard", "fiber")
    std_2km = row(2.0, "standard", "fiber")
    if not std_short.qber > std_2km.qber:
        ok = False
        notes.append("no short-distance excess on standard fibre")

    for r in fig3_rows:
        if r.channel_mode != "attenuator":
            continue
        twin = row(r.axis_value, r.profile, "fiber")
        slack = 3.0 * math.hypot(r.qber_err, twin.qber_err)
        if r.qber > twin.qber + slack:
            ok = False
            notes.append(f"attenuator above fibre at {r.axis_value} km {r.profile}")

    _verdict(
        3,
        ok,
        "; ".join(notes)
        or f"monotone beyond 2 km, short-distance excess "
        f"{std_short.qber:.4f} > {std_2km.qber:.4f}, attenuator <= fibre",
    )


def test_criterion_04_net_rate_split(anchor_pool):
    # Standard yields nothing at the design point; enhanced lands in the
    # 10 to 40 kbit/s band.
    params = default_config().security
    nets = {
        profile: net_rate(pool["sift_rate_bps"], pool["qber"], params)
        for profile, pool in anchor_pool.items()
    }
    ok = nets["standard"] == 0.0 and 10_000.0 <= nets["enhanced"] <= 40_000.0
    _verdict(
        4,
        ok,
        f"std net {nets['standard']:.0f} bit/s, "
        f"enh net {nets['enhanced']:.0f} bit/s in [10000, 40000]",
    )


def test_criterion_05_operating_rate(fitted):
    # Short fibre, 1 to 2 GHz clocks: total detected rate 0.5 to 1.5 Mcps.
    rates = {}
    for clock in (1.0e9, 2.0e9):
        for profile in ("standard", "enhanced"):
            anchor = CalibrationAnchor(
                profile=profile, target_qber=0.0, clock_hz=clock, length_km=0.1
            )
            cfg = anchor_config(fitted.config, anchor)
            summary, _, _ = run_link(cfg, 20_000_000, seed=11)
            rates[(clock, profile)] = summary.detected_rate_cps
    ok = all(0.5e6 <= r <= 1.5e6 for r in rates.values())
    lo, hi = min(rates.values()), max(rates.values())
    _verdict(5, ok, f"detected rates span {lo/1e6:.3f} to {hi/1e6:.3f} Mcps")


def test_criterion_06_oracle_equivalence(fitted):
    # |closed-form - Monte Carlo| <= max(0.02, 3 sigma) over the full
    # clock x length x profile grid, within a 10 minute budget.
    t0 = time.perf_counter()
    ok = True
    worst_gap = worst_tol = 0.0
    points = 0
    for clock in (1.0e9, 1.5e9, 2.0e9):
        for length in (0.1, 6.55, 15.0):
            for profile in ("standard", "enhanced"):
                anchor = CalibrationAnchor(
                    profile=profile, target_qber=0.0, clock_hz=clock,
                    length_km=length,
                )
                cfg = anchor_config(fitted.config, anchor)
                pred = analytic_rates(cfg)
                sift_per_slot = pred.sift_rate_bps / clock
                n = int(min(max(1500.0 / max(sift_per_slot, 1e-12), 200_000), 2e8))
                summary, _, _ = run_link(cfg, n, seed=60)
                tol = max(0.02, 3.0 * summary.statistical_error_qber)
                gap = abs(pred.qber - summary.qber)
                points += 1
                if gap > worst_gap:
                    worst_gap, worst_tol = gap, tol
                if gap > tol:
                    ok = False
    elapsed = time.perf_counter() - t0
    ok = ok and elapsed <= 600.0
    _verdict(
        6,
        ok,
        f"{points} grid points, worst gap {worst_gap:.4f} "
        f"(tol there {worst_tol:.4f}), {elapsed:.0f} s",
    )


def test_criterion_07_response_widths():
    # Sampled response FWHM against the saturation data: standard 950/570 ps
    # at high/low rate, enhanced 450/370 ps, each within its band.
    cases = [
        ("standard", 2e6, 950.0, 40.0),
        ("enhanced", 2e6, 450.0, 20.0),
        ("standard", 1e3, 570.0, 25.0),
        ("enhanced", 1e3, 370.0, 17.0),
    ]
    ok = True
    details = []
    for i, (profile, rate, center, band) in enumerate(cases):
        dev = get_profile(profile)
        samples = sample_response_time(
            dev, rate, np.zeros(200_000), np.random.default_rng(70 + i)
        )
        fwhm = 2.3548200450309493 * float(samples.std())
        if abs(fwhm - center) > band:
            ok = False
        details.append(f"{profile}@{rate:.0e}: {fwhm:.0f}ps")
    _verdict(7, ok, ", ".join(details))


def test_criterion_08_ideal_brute_force():
    # Lossless, noiseless, single photon per slot: error exactly zero and a
    # quarter of the slots conclusive, 0.25 +- 0.002 over 1e6 slots.
    det = DetectorProfile(
        name="ideal",
        efficiency=1.0,
        dark_cps=0.0,
        dead_time_ns=0.0,
        jitter_rates_cps=(1.0, 2.0),
        jitter_fwhms_ps=(1e-9, 1e-9),
        centroid_alpha=0.0,
    )
    config = LinkConfig(
        source=SourceSpec(clock_hz=2e9, fixed_photon_count=1, base_pulse_fwhm_ps=1e-6),
        channel=ChannelSpec(length_km=0.0, excess_loss_db=0.0),
        detector=det,
        gate=GateSpec(gate_fraction=1.0, sync_fwhm_ps=0.0),
    )
    summary, key, _ = run_link(config, 1_000_000, seed=80)
    frac = key.n_bits / 1_000_000
    ok = summary.qber == 0.0 and abs(frac - 0.25) <= 0.002
    _verdict(8, ok, f"qber {summary.qber}, sift fraction {frac:.4f}")


def test_criterion_09_postprocessing():
    # Cascade leaves no residual errors in at least 99 of 100 seeded trials;
    # Toeplitz hashing is deterministic and GF(2)-linear bit for bit; the
    # entropy endpoints are exact.
    clean = 0
    for trial in range(100):
        rng = np.random.default_rng(5000 + trial)
        alice = rng.integers(0, 2, 10_000, dtype=np.uint8)
        bob = alice.copy()
        flips = rng.choice(10_000, 660, replace=False)
        bob[flips] ^= 1
        _, report = reconcile(alice, bob, 0.066, np.random.default_rng(6000 + trial))
        clean += report.residual_errors == 0

    rng = np.random.default_rng(90)
    a = rng.integers(0, 2, 300, dtype=np.uint8)
    b = rng.integers(0, 2, 300, dtype=np.uint8)
    deterministic = np.array_equal(
        privacy_amplify(a, 13, 128), privacy_amplify(a, 13, 128)
    )
    linear = np.array_equal(
        privacy_amplify(a ^ b, 13, 128),
        privacy_amplify(a, 13, 128) ^ privacy_amplify(b, 13, 128),
    )
    entropy_exact = (
        binary_entropy(0.0) == 0.0
        and binary_entropy(0.5) == 1.0
        and binary_entropy(1.0) == 0.0
    )
    ok = clean >= 99 and deterministic and linear and entropy_exact
    _verdict(
        9,
        ok,
        f"cascade clean {clean}/100, toeplitz deterministic {deterministic}, "
        f"linear {linear}, entropy endpoints exact {entropy_exact}",
    )


def test_criterion_10_reproducible_csv(fitted):
    # The same sweep description and seed produce byte-identical CSV text
    # whether one process or eight do the work.
    spec = SweepSpec(
        name="repro",
        axis="clock_hz",
        points=(1.0e9, 1.5e9, 2.0e9),
        fixed=fitted.config,
        base_seed=4,
        target_sifted_bits=100,
        min_slots=50_000,
        max_slots=2_000_000,
    )
    serial = rows_to_csv(run_sweep(spec, workers=1))
    parallel = rows_to_csv(run_sweep(spec, workers=8))
    again = rows_to_csv(run_sweep(spec, workers=1))
    ok = serial == parallel == again
    _verdict(
        10,
        ok,
        f"{len(serial.splitlines()) - 1} rows, "
        f"1-worker == 8-worker bytes: {serial == parallel}",
    )
