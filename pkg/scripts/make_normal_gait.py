"""Regenerate src/exokin/data/normal_gait.csv.

The bundled table is synthetic: smooth periodic curves shaped to the
usual adult sagittal-plane landmarks (heel-strike hip flexion near 30 deg,
terminal-stance hip extension near -9 deg, loading-response and swing knee
peaks near 18 and 60 deg, push-off plantarflexion near -20 deg).  It is a
stand-in for a measured normative database, not a measurement.
"""

from pathlib import Path

import numpy as np

OUT = Path(__file__).resolve().parents[1] / "src" / "exokin" / "data" / "normal_gait.csv"

# hip: 3-harmonic least-squares fit through landmark values (percent cycle, deg)
HIP_KNOTS = [(0, 30), (10, 25), (20, 17), (30, 8), (40, 0), (50, -8), (55, -9.5),
             (60, -6), (70, 10), (80, 25), (87, 32), (95, 31)]


def fourier_basis(p, n=3):
    cols = [np.ones_like(p)]
    for k in range(1, n + 1):
        cols += [np.cos(2 * np.pi * k * p), np.sin(2 * np.pi * k * p)]
    return np.stack(cols, axis=1)


def bump(p, center, width):
    d = (p - center + 0.5) % 1.0 - 0.5
    return np.exp(-0.5 * (d / width) ** 2)


def curves(p):
    kp, kv = np.array(HIP_KNOTS, dtype=float).T
    coef, *_ = np.linalg.lstsq(fourier_basis(kp / 100), kv, rcond=None)
    hip = fourier_basis(p) @ coef
    knee = (5 + 13 * bump(p, 0.15, 0.055) + 55 * bump(p, 0.72, 0.085)
            - 1.5 * bump(p, 0.40, 0.10))
    ankle = (1.5 - 6 * bump(p, 0.07, 0.035) + 10 * bump(p, 0.44, 0.10)
             - 23 * bump(p, 0.63, 0.055) - 1.5 * bump(p, 0.90, 0.10))
    return hip, knee, ankle


def main():
    p = np.round(np.linspace(0.0, 1.0, 51), 2)
    hip, knee, ankle = curves(p)
    lines = [
        "# Normal adult sagittal-plane gait, one cycle starting at right heel strike.",
        "# SYNTHETIC: smooth curves shaped to typical normative landmarks by",
        "# scripts/make_normal_gait.py; not a measured dataset.",
        "# Signs: hip flexion +, knee flexion +, ankle dorsiflexion +. Units: degrees.",
        "# The phase 1.00 row repeats phase 0.00 and is dropped on load.",
        "phase,hip_flexion_deg,knee_flexion_deg,ankle_flexion_deg",
    ]
    for row in zip(p, hip, knee, ankle):
        lines.append("{:.2f},{:.2f},{:.2f},{:.2f}".format(*row))
    OUT.write_text("\n".join(lines) + "\n", encoding="utf-8")


if __name__ == "__main__":
    main()
