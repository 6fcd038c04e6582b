#!/usr/bin/env python3
"""Independent oracle values frozen into the C++ tests.

Evaluated with mpmath at 40 significant digits, with every quantity converted
to SI units by hand. Nothing here imports or mirrors the C++ implementation.
"""
import mpmath as mp

mp.mp.dps = 40

C = mp.mpf("299792458")


def si_link(tx_hz, lo_hz, baud, lam_nm, d_ps_nm_km, l_km):
    # ps/nm/km -> s/m^2 : 1e-12 s / (1e-9 m * 1e3 m)
    d_si = mp.mpf(d_ps_nm_km) * mp.mpf("1e-12") / (mp.mpf("1e-9") * mp.mpf("1e3"))
    return dict(tx=mp.mpf(tx_hz), lo=mp.mpf(lo_hz), ts=1 / mp.mpf(baud),
                lam=mp.mpf(lam_nm) * mp.mpf("1e-9"), d=d_si, l=mp.mpf(l_km) * 1000)


def laser(k):
    return 2 * mp.pi * (k["tx"] + k["lo"]) * k["ts"]


def eepn(k):
    return mp.pi * k["lam"] ** 2 * k["d"] * k["l"] * k["lo"] / (2 * C * k["ts"])


def show(name, v):
    print(f"{name:40s} {mp.nstr(v, 20)}")


k = si_link(1e6, 1e6, 32e9, 1550, 17, 1000)
show("laser_pn_variance(1MHz,1MHz,32G)", laser(k))
show("eepn_variance(1000km)", eepn(k))
show("total_variance(1000km)", laser(k) + eepn(k))
show("effective_linewidth(1000km) Hz", (laser(k) + eepn(k)) / (2 * mp.pi * k["ts"]))
show("crossover L0 m", 8 * C * k["ts"] ** 2 / (k["lam"] ** 2 * k["d"]))

show("erfc(2)", mp.erfc(2))
show("erfc(0.5)", mp.erfc(mp.mpf("0.5")))
show("log erfc(12)", mp.log(mp.erfc(12)))
show("log erfc(30)", mp.log(mp.erfc(30)))


def floor_nlms(n, s2):
    return mp.erfc(mp.pi / (n * mp.sqrt(2) * mp.sqrt(s2))) / mp.log(n, 2)


def bwa_var(p, n_blk, s2):
    a, b = p - 1, n_blk - p
    return s2 * (2 * a**3 + 3 * a**2 + 2 * b**3 + 3 * b**2 + n_blk - 1) / (6 * n_blk**2)


def floor_bwa(n, n_blk, s2):
    acc = mp.mpf(0)
    for p in range(1, n_blk + 1):
        v = bwa_var(p, n_blk, s2)
        if v > 0:
            acc += mp.erfc(mp.pi / (n * mp.sqrt(2) * mp.sqrt(v)))
    return acc / (n_blk * mp.log(n, 2))


def floor_vv(n, n_vv, s2):
    if n_vv == 1:
        return mp.mpf(0)
    f = mp.mpf(n_vv**2 - 1) / (6 * n_vv)
    return mp.erfc(mp.pi / (n * mp.sqrt(f) * mp.sqrt(s2))) / mp.log(n, 2)


def coding_rate(p):
    p = mp.mpf(p)
    return 1 + p * mp.log(p, 2) + (1 - p) * mp.log(1 - p, 2)


show("floor_nlms(8, 0.04)", floor_nlms(8, mp.mpf("0.04")))
show("floor_bwa(8, 11, 0.01)", floor_bwa(8, 11, mp.mpf("0.01")))
show("floor_vv(8, 11, 0.01)", floor_vv(8, 11, mp.mpf("0.01")))
show("coding_rate(1e-3)", coding_rate("1e-3"))
show("SE(floor_vv(8,11,0.01),8,1)", coding_rate(floor_vv(8, 11, mp.mpf("0.01"))) * 3)

# Noiseless CD impulse: RMS spread of a uniform group-delay distribution
# across the symbol-rate band. width = lambda^2 D L Rs / c.
width = k["lam"] ** 2 * k["d"] * k["l"] / (C * k["ts"])
show("cd rms spread (s)", width / mp.sqrt(12))
show("cd rms spread (symbols)", width / mp.sqrt(12) / k["ts"])
