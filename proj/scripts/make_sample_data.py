#!/usr/bin/env python3
"""Regenerates data/energy_sample.csv.

A 12,000-row sample shaped like a household energy-monitoring feed:
10-minute cadence (~83 days), indoor temperature/humidity sensors,
outdoor weather, and an appliance load target. The window rides a
winter-to-spring seasonal ramp with daily and weekly cycles, so any
one-week contiguous training block differs measurably from a multi-week
evaluation window - the regime a scale-up experiment has to cope with.

The file is committed; rerunning this script reproduces it byte for byte.
"""

import numpy as np

OUT = "data/energy_sample.csv"
N = 12000


def ar1(rng, n, rho, sigma):
    x = np.zeros(n)
    for i in range(1, n):
        x[i] = rho * x[i - 1] + rng.normal(0.0, sigma)
    return x


def main():
    rng = np.random.default_rng(20250810)
    t = np.arange(N)
    hour = (t * 10.0 / 60.0) % 24.0
    day_index = t * 10.0 / 60.0 / 24.0
    weekend = ((day_index.astype(int) % 7) >= 5).astype(float)

    season = np.linspace(0.0, 1.0, N)  # winter -> spring
    day = np.sin(2.0 * np.pi * (hour - 14.0) / 24.0)

    # outdoor block
    t_out = 1.5 + 11.0 * season + 3.5 * day + ar1(rng, N, 0.97, 0.30)
    spread = 2.0 + 4.0 * rng.beta(2.0, 5.0, N)
    tdew = t_out - spread
    rh_out = np.clip(
        100.0 - 5.0 * spread + rng.normal(0.0, 3.0, N) - 6.0 * season, 30.0, 99.0
    )
    press = 752.0 + 6.0 * season + ar1(rng, N, 0.99, 0.40)
    wind = np.clip(2.0 + 3.0 * rng.weibull(1.6, N) * (1.3 - 0.5 * season), 0.0, 14.0)
    vis = np.clip(28.0 + 0.45 * (99.0 - rh_out) + rng.normal(0.0, 6.0, N), 15.0, 66.0)

    # occupancy is latent: morning/evening peaks, more presence on weekends
    occ = (
        0.7 * ((hour > 6.0) & (hour < 9.0))
        + 1.0 * ((hour > 17.0) & (hour < 23.0))
        + 0.35 * weekend
        + 0.25 * (rng.random(N) < 0.3)
    )

    # indoor sensors follow the outdoors with thermostat damping
    t1 = 20.2 + 0.20 * (t_out - 7.0) + 0.35 * occ + 1.2 * season + ar1(rng, N, 0.9, 0.12)
    t2 = 19.3 + 0.28 * (t_out - 7.0) + 0.50 * occ + 1.5 * season + ar1(rng, N, 0.9, 0.15)
    t3 = 20.9 + 0.16 * (t_out - 7.0) + 0.20 * occ + 1.0 * season + ar1(rng, N, 0.9, 0.10)
    rh1 = np.clip(38.0 + 0.20 * (rh_out - 60.0) + 2.2 * occ + rng.normal(0.0, 1.6, N), 25.0, 58.0)
    rh2 = np.clip(40.5 + 0.24 * (rh_out - 60.0) + 3.0 * occ + rng.normal(0.0, 1.8, N), 25.0, 60.0)
    rh3 = np.clip(39.0 + 0.16 * (rh_out - 60.0) + 1.5 * occ + rng.normal(0.0, 1.4, N), 25.0, 56.0)

    evening = ((hour > 16.5) | (hour < 7.0)).astype(float)
    lights = 10.0 * np.clip(np.round(occ * evening * 3.0 + rng.normal(0.0, 0.6, N)), 0, 7)

    heating_demand = np.maximum(16.0 - t_out, 0.0)
    spikes = (rng.random(N) < 0.07) * rng.lognormal(4.4, 0.55, N)
    appliances = (
        40.0
        + 80.0 * occ
        + 7.5 * heating_demand
        + 0.9 * lights
        + (1.0 + 0.6 * (1.0 - season)) * spikes
        + rng.normal(0.0, 26.0, N)
    )
    appliances = np.round(np.clip(appliances, 10.0, 1080.0) / 10.0) * 10.0

    cols = [
        ("Appliances", appliances, "%.0f"),
        ("lights", lights, "%.0f"),
        ("T1", t1, "%.3f"),
        ("RH_1", rh1, "%.3f"),
        ("T2", t2, "%.3f"),
        ("RH_2", rh2, "%.3f"),
        ("T3", t3, "%.3f"),
        ("RH_3", rh3, "%.3f"),
        ("T_out", t_out, "%.3f"),
        ("RH_out", rh_out, "%.3f"),
        ("Press_mm_hg", press, "%.2f"),
        ("Windspeed", wind, "%.3f"),
        ("Tdewpoint", tdew, "%.3f"),
        ("Visibility", vis, "%.2f"),
    ]

    with open(OUT, "w", newline="\n") as f:
        f.write(",".join(name for name, _, _ in cols) + "\n")
        for i in range(N):
            f.write(",".join(fmt % col[i] for _, col, fmt in cols) + "\n")
    print(f"wrote {OUT}: {N} rows, {len(cols)} columns")


if __name__ == "__main__":
    main()
