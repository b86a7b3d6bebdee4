"""Regenerates the bundled trace fixtures.

antiphase_a.csv / antiphase_b.csv: one day at 15 min, 1 + sin and 1 - sin.
solar_15min.csv / wind_15min.csv: 30 days at 15 min shaped like regional
generation feeds (MW): a clear-sky solar bell scaled by daily cloudiness,
and wind with a night-time bias plus AR(1) weather noise. One interior
record is dropped from the wind file and a few night-time solar readings
are slightly negative, as in metered feeds.
"""
import math
import random
from datetime import datetime, timedelta

START = datetime(2024, 6, 1)
STEP = timedelta(minutes=15)


def write(path, rows):
    with open(path, "w") as f:
        f.write("timestamp,mw\n")
        for ts, v in rows:
            f.write(f"{ts:%Y-%m-%dT%H:%M:%S},{v:.3f}\n")


def antiphase():
    a, b = [], []
    for k in range(96):
        s = math.sin(2 * math.pi * k / 96)
        a.append((START + k * STEP, 1 + s))
        b.append((START + k * STEP, 1 - s))
    write("antiphase_a.csv", a)
    write("antiphase_b.csv", b)


def solar_wind():
    rng = random.Random(20240601)
    solar, wind = [], []
    ar = 0.0
    cloud = 1.0
    for k in range(30 * 96):
        ts = START + k * STEP
        hour = ts.hour + ts.minute / 60
        if k % 96 == 0:
            cloud = rng.uniform(0.35, 1.0)
        bell = max(0.0, math.sin(math.pi * (hour - 5.5) / 15.0)) ** 1.5
        s = 2400 * cloud * bell * (1 + rng.gauss(0, 0.04))
        if bell == 0.0:
            s = rng.gauss(0, 0.8)
        ar = 0.985 * ar + rng.gauss(0, 22)
        w = 900 + 450 * math.cos(2 * math.pi * (hour - 2.0) / 24) + ar
        solar.append((ts, s))
        wind.append((ts, max(w, 5.0)))
    del wind[1000]
    write("solar_15min.csv", solar)
    write("wind_15min.csv", wind)


if __name__ == "__main__":
    antiphase()
    solar_wind()
