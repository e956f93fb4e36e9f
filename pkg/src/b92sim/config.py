"""Run configuration: the gate window, the bundled link description, TOML I/O.

A complete simulated link is described by five pieces (source, channel,
detector, gate, security), bundled here as LinkConfig. Every field has a
default tuned so that the out-of-the-box configuration is a working 2 GHz
link; a TOML file only needs to state what differs.

The TOML schema mirrors the dataclass fields one section per piece:

    [source]    clock_hz, mean_photon_number, wavelength_nm,
                sync_wavelength_nm, base_pulse_fwhm_ps, emitter_bandwidth_hz,
                fixed_photon_count (omit for Poisson statistics)
    [channel]   length_km, atten_db_per_km, excess_loss_db,
                broadening_ps_per_km, mode ("fiber" or "attenuator")
    [detector]  profile ("standard" or "enhanced"), plus optional overrides:
                efficiency, dark_cps, dead_time_ns, jitter_rates_cps,
                jitter_fwhms_ps, centroid_alpha, tail_fraction, tail_tau_ps
    [gate]      gate_fraction, window_offset_ps, sync_fwhm_ps
    [security]  qber_secure_threshold, ec_inefficiency_f

Unknown sections or keys are rejected rather than ignored, so a typo cannot
silently fall back to a default.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .detector import DetectorProfile, get_profile
from .photonics import ChannelSpec, SourceSpec
from .postproc import SecurityParams


@dataclass(frozen=True)
class GateSpec:
    """Time-gated acquisition window, as a fraction of the clock period.

    A click is kept only if it lands within gate_fraction of a period,
    centred on the expected arrival (plus window_offset_ps). sync_fwhm_ps is
    the timing jitter of the recovered clock edge that positions the window;
    it rides on every photon timestamp.
    """

    gate_fraction: float = 0.85
    window_offset_ps: float = 0.0
    sync_fwhm_ps: float = 40.0

    def __post_init__(self) -> None:
        if not 0.0 < self.gate_fraction <= 1.0:
            raise ValueError("gate_fraction must be in (0, 1]")
        if self.sync_fwhm_ps < 0:
            raise ValueError("sync_fwhm_ps must be non-negative")

    def window_width_ps(self, clock_hz: float) -> float:
        """Full width (ps) of the acceptance window at a given clock."""
        return self.gate_fraction * 1e12 / clock_hz


@dataclass(frozen=True)
class LinkConfig:
    """Everything needed to simulate or predict one point-to-point link."""

    source: SourceSpec = SourceSpec()
    channel: ChannelSpec = ChannelSpec()
    detector: DetectorProfile = get_profile("standard")
    gate: GateSpec = GateSpec()
    security: SecurityParams = SecurityParams()

    def replace(self, **sections) -> "LinkConfig":
        """Copy with whole sections swapped, e.g. cfg.replace(gate=...)."""
        return dataclasses.replace(self, **sections)


def default_config(profile: str = "standard") -> LinkConfig:
    """The built-in operating point with the chosen detector profile."""
    return LinkConfig(detector=get_profile(profile))


_SECTION_FIELDS = {
    "source": ("clock_hz", "mean_photon_number", "wavelength_nm",
               "sync_wavelength_nm", "base_pulse_fwhm_ps",
               "emitter_bandwidth_hz", "fixed_photon_count"),
    "channel": ("length_km", "atten_db_per_km", "excess_loss_db",
                "broadening_ps_per_km", "mode"),
    "detector": ("profile", "efficiency", "dark_cps", "dead_time_ns",
                 "jitter_rates_cps", "jitter_fwhms_ps", "centroid_alpha",
                 "tail_fraction", "tail_tau_ps"),
    "gate": ("gate_fraction", "window_offset_ps", "sync_fwhm_ps"),
    "security": ("qber_secure_threshold", "ec_inefficiency_f"),
}


def _check_keys(data: dict) -> None:
    for section, body in data.items():
        if section not in _SECTION_FIELDS:
            raise ValueError(
                f"unknown config section [{section}]; expected one of: "
                + ", ".join(_SECTION_FIELDS)
            )
        if not isinstance(body, dict):
            raise ValueError(f"[{section}] must be a table of keys")
        for key in body:
            if key not in _SECTION_FIELDS[section]:
                raise ValueError(
                    f"unknown key {key!r} in [{section}]; expected one of: "
                    + ", ".join(_SECTION_FIELDS[section])
                )


def _number(section: str, key: str, value) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValueError(f"{key} in [{section}] must be a number")
    return float(value)


def _ps_table(section: str, key: str, value) -> tuple[float, ...]:
    if not isinstance(value, (list, tuple)):
        raise ValueError(f"{key} in [{section}] must be an array of numbers")
    return tuple(_number(section, key, v) for v in value)


def config_from_mapping(data: dict) -> LinkConfig:
    """Build a LinkConfig from parsed TOML data, defaults filling the gaps."""
    _check_keys(data)

    src = dict(data.get("source", {}))
    if "fixed_photon_count" in src:
        n = src["fixed_photon_count"]
        if isinstance(n, bool) or not isinstance(n, int):
            raise ValueError("fixed_photon_count in [source] must be an integer")
    for key in list(src):
        if key != "fixed_photon_count":
            src[key] = _number("source", key, src[key])
    source = SourceSpec(**src)

    ch = dict(data.get("channel", {}))
    for key in list(ch):
        if key == "mode":
            if not isinstance(ch[key], str):
                raise ValueError("mode in [channel] must be a string")
        else:
            ch[key] = _number("channel", key, ch[key])
    channel = ChannelSpec(**ch)

    det = dict(data.get("detector", {}))
    base_name = det.pop("profile", "standard")
    if not isinstance(base_name, str):
        raise ValueError("profile in [detector] must be a string")
    for key in list(det):
        if key in ("jitter_rates_cps", "jitter_fwhms_ps"):
            det[key] = _ps_table("detector", key, det[key])
        else:
            det[key] = _number("detector", key, det[key])
    if ("jitter_rates_cps" in det) != ("jitter_fwhms_ps" in det):
        raise ValueError(
            "jitter_rates_cps and jitter_fwhms_ps must be overridden together"
        )
    detector = dataclasses.replace(get_profile(base_name), **det)

    gt = dict(data.get("gate", {}))
    for key in list(gt):
        gt[key] = _number("gate", key, gt[key])
    gate = GateSpec(**gt)

    sec = dict(data.get("security", {}))
    for key in list(sec):
        sec[key] = _number("security", key, sec[key])
    security = SecurityParams(**sec)

    return LinkConfig(source=source, channel=channel, detector=detector,
                      gate=gate, security=security)


def load_config(path: str | Path) -> LinkConfig:
    """Read a TOML file and return the resolved LinkConfig."""
    with open(path, "rb") as fh:
        data = tomllib.load(fh)
    return config_from_mapping(data)


def config_to_mapping(config: LinkConfig) -> dict:
    """Flatten a LinkConfig back into the TOML section/key layout."""
    src = dataclasses.asdict(config.source)
    if src["fixed_photon_count"] is None:
        del src["fixed_photon_count"]
    det = dataclasses.asdict(config.detector)
    det = {"profile": det.pop("name"), **det}
    return {
        "source": src,
        "channel": dataclasses.asdict(config.channel),
        "detector": det,
        "gate": dataclasses.asdict(config.gate),
        "security": dataclasses.asdict(config.security),
    }


def _toml_value(value) -> str:
    if isinstance(value, str):
        return '"' + value.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_toml_value(v) for v in value) + "]"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return repr(value)
    raise TypeError(f"cannot render {type(value).__name__} as TOML")


def render_config(config: LinkConfig) -> str:
    """Serialize the resolved configuration as TOML text.

    The output round-trips through load_config, and doubles as the
    human-readable echo printed before a run.
    """
    parts = []
    for section, body in config_to_mapping(config).items():
        parts.append(f"[{section}]")
        for key, value in body.items():
            parts.append(f"{key} = {_toml_value(value)}")
        parts.append("")
    return "\n".join(parts)
