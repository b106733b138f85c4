#!/usr/bin/env python3
"""Recompute the reference constants from first principles.

Stdlib math only, no package imports: the values printed here serve as an
independent cross-check of the library's propagation and airtime code.
Output is one KEY=VALUE line per constant.
"""
import math

# indoor log-distance loss: 20 log10(f_MHz) + 31 log10(d_m) - 28, d floored at 1 m
COEFF = 31.0
OFFSET_DB = -28.0
TX_DBM = 20.0
SENS_DBM = -90.0
F_ACCESS_MHZ = 2400.0
F_BACKHAUL_MHZ = 5000.0

PACKET_BITS = 12000
TOP_RATE_BPS = 144_400_000.0
# DCF fixed cost per frame at 2.4 GHz: DIFS + mean backoff + preamble + SIFS + ACK
OVERHEAD_US = 28.0 + 7.5 * 9.0 + 40.0 + 10.0 + 32.0


def path_loss_db(f_mhz: float, d_m: float) -> float:
    return 20.0 * math.log10(f_mhz) + COEFF * math.log10(max(d_m, 1.0)) + OFFSET_DB


def distance_for_rssi_m(rssi_dbm: float, f_mhz: float) -> float:
    exponent = (TX_DBM - rssi_dbm - 20.0 * math.log10(f_mhz) - OFFSET_DB) / COEFF
    return 10.0 ** exponent


def airtime_s(bits: int, rate_bps: float) -> float:
    return OVERHEAD_US * 1e-6 + bits / rate_bps


def main() -> None:
    t = airtime_s(PACKET_BITS, TOP_RATE_BPS)
    u = 1e6 / PACKET_BITS * t
    constants = {
        "PATH_LOSS_2400MHZ_10M_DB": path_loss_db(F_ACCESS_MHZ, 10.0),
        "RSSI_10M_DBM": TX_DBM - path_loss_db(F_ACCESS_MHZ, 10.0),
        "RSSI_100M_DBM": TX_DBM - path_loss_db(F_ACCESS_MHZ, 100.0),
        "MAX_RANGE_2G4_M": distance_for_rssi_m(SENS_DBM, F_ACCESS_MHZ),
        "DIST_M70DBM_5G_M": distance_for_rssi_m(-70.0, F_BACKHAUL_MHZ),
        "DIST_M90DBM_5G_M": distance_for_rssi_m(SENS_DBM, F_BACKHAUL_MHZ),
        "AIRTIME_12000B_144M4_S": t,
        "UTILIZATION_1MBPS": u,
        "DELAY_1MBPS_MS": t / (1.0 - u) * 1e3,
        "WEIGHTED_RSSI_MINUS35": (-35.0 - TX_DBM) / (SENS_DBM - TX_DBM),
    }
    for key, value in constants.items():
        print(f"{key}={value!r}")


if __name__ == "__main__":
    main()
