"""Walk through the transmitter and fibre models.

Shows what leaves the source per clock period, how the emitter pulse
broadens as the clock approaches the laser bandwidth, and how many photons
survive fibres of increasing length.
"""

import numpy as np

from b92sim.photonics import (
    ChannelSpec,
    SourceSpec,
    channel_transmittance,
    draw_photon_number,
    emitter_pulse_fwhm,
)

rng = np.random.default_rng(1)

# --- photon number statistics of the attenuated laser -------------------
source = SourceSpec()
n = draw_photon_number(source.mean_photon_number, rng, size=1_000_000)
occupied = n >= 1
multi = n >= 2

print("attenuated laser, mean photon number", source.mean_photon_number)
print(f"  empty periods        {np.mean(n == 0):8.4f}")
print(f"  occupied periods     {occupied.mean():8.4f}")
print(f"  multiphoton|occupied {multi.sum() / occupied.sum():8.4f}")
print()

# --- emitter pulse width against clock frequency ------------------------
print("emitter pulse FWHM (base 30 ps, 5 GHz bandwidth)")
for clock in (0.5e9, 1e9, 2e9, 5e9):
    src = SourceSpec(clock_hz=clock)
    print(f"  {clock/1e9:4.1f} GHz clock -> {emitter_pulse_fwhm(src):6.1f} ps")
print()

# --- fibre loss and arrival-time spread ----------------------------------
print("fibre at 2.2 dB/km plus 11.7 dB fixed loss")
print("  length   transmittance   photons/period   spread")
for length in (0.1, 2.0, 6.55, 15.0):
    ch = ChannelSpec(length_km=length)
    t = channel_transmittance(ch)
    print(
        f"  {length:5.2f} km   {t:11.3e}   {0.1 * t:14.3e}   "
        f"{ch.broadening_fwhm_ps:5.1f} ps"
    )
print()

# The attenuator bench reproduces the loss but not the dispersion.
atten = ChannelSpec(length_km=15.0, mode="attenuator")
fiber = ChannelSpec(length_km=15.0, mode="fiber")
print("15 km equivalent attenuator: same loss,", end=" ")
print(
    f"spread {atten.broadening_fwhm_ps:.0f} ps vs {fiber.broadening_fwhm_ps:.0f} ps in fibre"
)
