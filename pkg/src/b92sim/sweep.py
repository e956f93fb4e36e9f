"""Parameter sweeps over clock frequency or channel length.

A sweep is a grid of (axis value, detector profile, channel mode) points,
each simulated for one or more trials with seeds derived by hashing the
point's coordinates together with the sweep's base seed. Points and trials
therefore do not share random streams, which buys three properties: adding
workers cannot change any number, adding grid points never perturbs
existing rows, and re-running a single point reproduces its row exactly.

The number of simulated periods per trial is chosen from the analytic
prediction so every point collects a comparable number of sifted bits
(slow, lossy points get longer acquisitions, up to a cap), keeping the
statistical error of the plotted error rates roughly uniform along a curve.

Two presets mirror the canonical measurement series: error rate and key
rate against clock frequency for both detector types, and against channel
length for both detector types over real fibre and over a plain attenuator.

Output is a CSV (floats written with repr, so files are byte-stable across
runs and machines) plus a gnuplot script that plots the curves from it.
"""

from __future__ import annotations

import dataclasses
import hashlib
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .analytics import analytic_rates
from .config import LinkConfig, config_from_mapping, default_config
from .detector import get_profile
from .postproc import net_rate
from .protocol import run_link

CSV_HEADER = ("axis_value,profile,channel_mode,qber,qber_err,"
              "sift_rate_bps,net_rate_bps,detected_rate_cps,seed")

_AXES = ("clock_hz", "length_km")


@dataclass(frozen=True)
class SweepRow:
    """One grid point's aggregated results, in CSV column order."""

    axis_value: float
    profile: str
    channel_mode: str
    qber: float
    qber_err: float
    sift_rate_bps: float
    net_rate_bps: float
    detected_rate_cps: float
    seed: int


@dataclass(frozen=True)
class SweepSpec:
    """A sweep grid and the per-point acquisition sizing policy."""

    name: str
    axis: str
    points: tuple[float, ...]
    profiles: tuple[str, ...] = ("standard", "enhanced")
    modes: tuple[str, ...] = ("fiber",)
    fixed: LinkConfig = default_config()
    trials_per_point: int = 1
    base_seed: int = 0
    target_sifted_bits: int = 3000
    min_slots: int = 200_000
    max_slots: int = 400_000_000

    def __post_init__(self) -> None:
        if self.axis not in _AXES:
            raise ValueError(f"axis must be one of {_AXES}")
        if not self.points:
            raise ValueError("points must not be empty")
        if any(b <= a for a, b in zip(self.points, self.points[1:])):
            raise ValueError("points must be strictly increasing")
        if not self.profiles:
            raise ValueError("profiles must not be empty")
        if self.trials_per_point < 1:
            raise ValueError("trials_per_point must be at least 1")
        if self.target_sifted_bits <= 0:
            raise ValueError("target_sifted_bits must be positive")
        if not 0 < self.min_slots <= self.max_slots:
            raise ValueError("need 0 < min_slots <= max_slots")


def preset_fig2(fixed: LinkConfig | None = None) -> SweepSpec:
    """Error and key rates against clock frequency, both detector types."""
    return SweepSpec(
        name="fig2",
        axis="clock_hz",
        points=(1.0e9, 1.2e9, 1.4e9, 1.6e9, 1.8e9, 2.0e9),
        fixed=fixed if fixed is not None else default_config(),
    )


def preset_fig3(fixed: LinkConfig | None = None) -> SweepSpec:
    """Error and key rates against channel length, fibre and attenuator."""
    return SweepSpec(
        name="fig3",
        axis="length_km",
        points=(0.1, 2.0, 4.2, 6.55, 10.0, 15.0),
        modes=("fiber", "attenuator"),
        fixed=fixed if fixed is not None else default_config(),
    )


_SWEEP_KEYS = ("name", "axis", "points", "profiles", "modes",
               "trials_per_point", "base_seed",
               "target_sifted_bits", "min_slots", "max_slots")


def sweep_from_mapping(data: dict) -> SweepSpec:
    """Build a SweepSpec from parsed TOML: a [sweep] table plus link sections."""
    data = dict(data)
    body = data.pop("sweep", None)
    if body is None:
        raise ValueError("sweep config needs a [sweep] section")
    for key in body:
        if key not in _SWEEP_KEYS:
            raise ValueError(
                f"unknown key {key!r} in [sweep]; expected one of: "
                + ", ".join(_SWEEP_KEYS)
            )
    if "axis" not in body or "points" not in body:
        raise ValueError("[sweep] needs at least axis and points")
    kwargs: dict = {
        "name": str(body.get("name", "sweep")),
        "axis": str(body["axis"]),
        "points": tuple(float(v) for v in body["points"]),
        "fixed": config_from_mapping(data),
    }
    if "profiles" in body:
        kwargs["profiles"] = tuple(str(p) for p in body["profiles"])
    if "modes" in body:
        kwargs["modes"] = tuple(str(m) for m in body["modes"])
    for key in ("trials_per_point", "base_seed",
                "target_sifted_bits", "min_slots", "max_slots"):
        if key in body:
            kwargs[key] = int(body[key])
    return SweepSpec(**kwargs)


def load_sweep(path: str | Path) -> SweepSpec:
    """Read a sweep description (grid plus base link) from a TOML file."""
    with open(path, "rb") as fh:
        data = tomllib.load(fh)
    return sweep_from_mapping(data)


def point_config(spec: SweepSpec, value: float, profile: str,
                 mode: str) -> LinkConfig:
    """The full link configuration of one grid point."""
    source = spec.fixed.source
    channel = spec.fixed.channel
    if spec.axis == "clock_hz":
        source = dataclasses.replace(source, clock_hz=value)
        channel = dataclasses.replace(channel, mode=mode)
    else:
        channel = dataclasses.replace(channel, length_km=value, mode=mode)
    return spec.fixed.replace(source=source, channel=channel,
                              detector=get_profile(profile))


def point_seed(base_seed: int, axis: str, value: float, profile: str,
               mode: str, trial: int = 0) -> int:
    """Stable per-trial seed from the point's coordinates alone.

    Hashing coordinates rather than grid position means inserting or
    removing points leaves every other row's numbers untouched.
    """
    tag = f"{base_seed}|{axis}|{value!r}|{profile}|{mode}|{trial}"
    digest = hashlib.sha256(tag.encode()).digest()
    return int.from_bytes(digest[:8], "big")


def _slots_for(config: LinkConfig, spec: SweepSpec) -> int:
    """Acquisition length targeting a fixed number of sifted bits per trial."""
    pred = analytic_rates(config)
    per_slot = pred.sift_rate_bps / config.source.clock_hz
    if per_slot <= 0:
        return spec.max_slots
    wanted = math.ceil(spec.target_sifted_bits / per_slot)
    return int(min(max(wanted, spec.min_slots), spec.max_slots))


def _run_point(task: tuple) -> SweepRow:
    """Simulate all trials of one grid point and pool the outcome.

    The error rate pools sifted bits across trials; rates are trial means.
    Runs in worker processes, so everything it needs arrives in the task
    tuple and anything it raises is re-raised with the point's coordinates.
    """
    config, n_slots, seeds, value, profile, mode = task
    bits = errors = 0
    sift_sum = det_sum = 0.0
    for trial, seed in enumerate(seeds):
        try:
            summary, _, _ = run_link(config, n_slots, seed)
        except Exception as exc:
            raise RuntimeError(
                f"sweep point failed: axis_value={value!r} profile={profile} "
                f"mode={mode} trial={trial} seed={seed}"
            ) from exc
        bits += summary.sifted_bits
        errors += summary.error_bits
        sift_sum += summary.sift_rate_bps
        det_sum += summary.detected_rate_cps
    q = errors / bits if bits else 0.0
    err = math.sqrt(q * (1.0 - q) / bits) if bits else 0.0
    sift_rate = sift_sum / len(seeds)
    return SweepRow(
        axis_value=value,
        profile=profile,
        channel_mode=mode,
        qber=q,
        qber_err=err,
        sift_rate_bps=sift_rate,
        net_rate_bps=net_rate(sift_rate, q, config.security),
        detected_rate_cps=det_sum / len(seeds),
        seed=seeds[0],
    )


def run_sweep(spec: SweepSpec, workers: int = 1) -> list[SweepRow]:
    """Simulate every grid point; row order and values ignore worker count."""
    if workers < 1:
        raise ValueError("workers must be at least 1")
    tasks = []
    for value in spec.points:
        for profile in spec.profiles:
            for mode in spec.modes:
                config = point_config(spec, value, profile, mode)
                seeds = tuple(
                    point_seed(spec.base_seed, spec.axis, value, profile,
                               mode, trial)
                    for trial in range(spec.trials_per_point)
                )
                tasks.append((config, _slots_for(config, spec), seeds,
                              value, profile, mode))
    if workers == 1:
        return [_run_point(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_point, tasks))


def rows_to_csv(rows: list[SweepRow]) -> str:
    """Render rows as CSV text; float cells use repr for byte stability."""
    lines = [CSV_HEADER]
    for r in rows:
        lines.append(",".join([
            repr(r.axis_value), r.profile, r.channel_mode, repr(r.qber),
            repr(r.qber_err), repr(r.sift_rate_bps), repr(r.net_rate_bps),
            repr(r.detected_rate_cps), str(r.seed),
        ]))
    return "\n".join(lines) + "\n"


_GNUPLOT = """\
# Plot {name}.csv: error rate and net key rate along the sweep axis.
set datafile separator ","
set terminal pngcairo size 900,600
set key outside right
set xlabel "{xlabel}"

set output "{name}_qber.png"
set ylabel "sifted-key error rate"
plot \\
{qber_lines}

set output "{name}_rate.png"
set ylabel "net key rate (bit/s)"
set logscale y
plot \\
{rate_lines}
"""


def _gnuplot_script(name: str, spec: SweepSpec, xlabel: str) -> str:
    curves = [(p, m) for p in spec.profiles for m in spec.modes]

    def lines(ycol: int) -> str:
        parts = []
        for p, m in curves:
            title = p if len(spec.modes) == 1 else f"{p} / {m}"
            cond = f'stringcolumn(2) eq "{p}" && stringcolumn(3) eq "{m}"'
            parts.append(
                f'  "{name}.csv" every ::1 '
                f"using (({cond}) ? $1 : NaN):{ycol} "
                f'with linespoints title "{title}"'
            )
        return ", \\\n".join(parts)

    return _GNUPLOT.format(name=name, xlabel=xlabel,
                           qber_lines=lines(4), rate_lines=lines(7))


def emit_results(rows: list[SweepRow], spec: SweepSpec, out_dir: str | Path) -> \
        tuple[Path, Path]:
    """Write <name>.csv and <name>.gp under out_dir; returns both paths."""
    if not rows:
        raise ValueError("refusing to emit an empty result table")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / f"{spec.name}.csv"
    csv_path.write_text(rows_to_csv(rows))
    xlabel = "clock frequency (Hz)" if spec.axis == "clock_hz" else \
        "channel length (km)"
    gp_path = out / f"{spec.name}.gp"
    gp_path.write_text(_gnuplot_script(spec.name, spec, xlabel))
    return csv_path, gp_path
