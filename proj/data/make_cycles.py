#!/usr/bin/env python3
"""Regenerate the bundled drive-cycle CSVs.

The bundled udds.csv / us06.csv are deterministic reconstructions of the
EPA UDDS and US06 dynamometer schedules, built from their published
aggregate characteristics (duration, distance, peak speed, stop pattern,
acceleration envelope). They are NOT the official second-by-second EPA
tables; if you have those, convert them to the same CSV schema
(t_s,v_ref_mps) and drop them in -- everything downstream only reads the
schema. See data/README.md.
"""

import math
import random
import sys

MPH = 0.44704
JITTER = random.Random(20260810)


def _jitter(v, amp):
    """Second-to-second speed variation of a human driver (deterministic)."""
    out = []
    z = 0.0
    for s in v:
        z = 0.55 * z + JITTER.uniform(-amp, amp)
        out.append(max(0.0, s + z) if s > 0.3 else s)
    return out


def _ramp(v0, v1, dur):
    """Cosine-smoothed speed ramp sampled at 1 Hz (excludes the start point)."""
    n = max(1, int(round(dur)))
    out = []
    for k in range(1, n + 1):
        s = 0.5 - 0.5 * math.cos(math.pi * k / n)
        out.append(v0 + (v1 - v0) * s)
    return out


def _cruise(v, dur, ripple, period, phase):
    n = max(1, int(round(dur)))
    out = []
    for k in range(1, n + 1):
        out.append(max(0.0, v + ripple * math.sin(2 * math.pi * (k + phase) / period)))
    return out


def build(segments, jitter_amp):
    v = [0.0]
    for seg in segments:
        kind = seg[0]
        if kind == "idle":
            v += [0.0] * int(seg[1])
        elif kind == "ramp":
            v += _ramp(v[-1], seg[1], seg[2])
        elif kind == "cruise":
            v += _cruise(seg[1], seg[2], seg[3], seg[4], seg[5])
    return _jitter(v, jitter_amp)


# UDDS-like: 1369 s, ~11.99 km, peak 56.7 mph = 25.35 m/s, frequent stops.
UDDS_SEGMENTS = [
    ("idle", 20),
    ("ramp", 11.1, 24), ("cruise", 10.6, 40, 0.9, 19, 0), ("ramp", 0.0, 22),
    ("idle", 17),
    ("ramp", 24.2, 48), ("ramp", 25.35, 14), ("ramp", 22.0, 20),
    ("cruise", 22.4, 48, 1.3, 31, 4), ("ramp", 24.6, 18), ("ramp", 20.0, 16),
    ("cruise", 20.4, 30, 1.0, 23, 9), ("ramp", 0.0, 34),
    ("idle", 21),
    ("ramp", 14.8, 22), ("cruise", 14.2, 32, 0.8, 17, 2), ("ramp", 0.0, 16),
    ("idle", 13),
    ("ramp", 12.5, 18), ("cruise", 12.0, 21, 0.7, 13, 5), ("ramp", 0.0, 14),
    ("idle", 9),
    ("ramp", 13.4, 19), ("cruise", 12.8, 36, 0.9, 21, 7), ("ramp", 0.0, 15),
    ("idle", 24),
    ("ramp", 15.6, 23), ("cruise", 15.0, 38, 1.0, 27, 1), ("ramp", 0.0, 17),
    ("idle", 12),
    ("ramp", 11.6, 16), ("cruise", 11.2, 26, 0.7, 15, 8), ("ramp", 0.0, 13),
    ("idle", 10),
    ("ramp", 13.0, 18), ("cruise", 12.4, 31, 0.8, 19, 3), ("ramp", 0.0, 14),
    ("idle", 16),
    ("ramp", 9.4, 13), ("cruise", 9.0, 19, 0.6, 11, 6), ("ramp", 0.0, 11),
    ("idle", 8),
    ("ramp", 12.1, 17), ("cruise", 11.7, 24, 0.8, 17, 2), ("ramp", 0.0, 14),
    ("idle", 13),
    ("ramp", 14.3, 20), ("cruise", 13.7, 30, 0.9, 23, 5), ("ramp", 0.0, 16),
    ("idle", 11),
    ("ramp", 10.7, 15), ("cruise", 10.3, 22, 0.7, 13, 9), ("ramp", 0.0, 12),
    ("idle", 15),
    ("ramp", 12.8, 18), ("cruise", 12.3, 26, 0.8, 19, 4), ("ramp", 0.0, 14),
    ("idle", 9),
    ("ramp", 8.5, 12), ("cruise", 8.1, 16, 0.5, 11, 7), ("ramp", 0.0, 10),
    ("idle", 12),
    ("ramp", 11.2, 16), ("cruise", 10.8, 25, 0.7, 15, 1), ("ramp", 0.0, 13),
    ("idle", 14),
    ("ramp", 13.9, 19), ("cruise", 13.3, 28, 0.9, 21, 8), ("ramp", 0.0, 15),
    ("idle", 18),
]

# US06-like: 596 s, ~12.9 km, peak 80.3 mph = 35.9 m/s, aggressive.
US06_SEGMENTS = [
    ("idle", 5),
    ("ramp", 27.0, 16), ("cruise", 26.0, 14, 1.5, 17, 0), ("ramp", 8.0, 12),
    ("ramp", 28.5, 14), ("cruise", 27.5, 18, 1.8, 19, 5), ("ramp", 0.0, 13),
    ("idle", 7),
    ("ramp", 30.5, 17), ("cruise", 30.0, 42, 1.6, 29, 2),
    ("ramp", 35.9, 22), ("cruise", 34.6, 48, 1.1, 33, 7),
    ("ramp", 28.8, 18), ("cruise", 29.5, 50, 1.9, 25, 3),
    ("ramp", 33.5, 16), ("cruise", 32.6, 48, 1.4, 31, 9),
    ("ramp", 24.0, 15), ("cruise", 25.1, 38, 2.0, 21, 4),
    ("ramp", 31.0, 14), ("cruise", 30.2, 24, 1.5, 27, 6),
    ("ramp", 0.0, 17),
    ("idle", 9),
    ("ramp", 17.0, 9), ("cruise", 16.2, 14, 1.0, 13, 1), ("ramp", 0.0, 8),
    ("idle", 6),
]


def write_csv(path, v):
    with open(path, "w", newline="\n") as f:
        f.write("t_s,v_ref_mps\n")
        for t, s in enumerate(v):
            f.write(f"{t},{s:.4f}\n")


def stats(v):
    dist = sum(0.5 * (v[i] + v[i + 1]) for i in range(len(v) - 1))
    return len(v), len(v) - 1, max(v), dist / 1000.0


def _limit(v, vmax, amax):
    out = [v[0]]
    for s in v[1:]:
        s = min(s, vmax)
        s = max(min(s, out[-1] + amax), out[-1] - amax)
        out.append(max(s, 0.0))
    return out


def main():
    udds = _limit(build(UDDS_SEGMENTS, 0.42), 25.35, 1.48)
    us06 = _limit(build(US06_SEGMENTS, 0.55), 35.90, 3.76)
    for name, v, want_n in (("udds", udds, 1370), ("us06", us06, 597)):
        # trim/pad trailing idle to hit the published duration exactly
        while len(v) > want_n and v[-1] == 0.0:
            v.pop()
        while len(v) < want_n:
            v.append(0.0)
        n, dur, vmax, km = stats(v)
        print(f"{name}: {n} samples, {dur} s, max {vmax:.2f} m/s, {km:.2f} km")
        write_csv(f"{name}.csv", v)


if __name__ == "__main__":
    sys.exit(main())
