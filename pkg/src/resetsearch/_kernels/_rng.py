"""Random streams shared by both kernel backends.

Each Monte Carlo path owns a xoshiro256++ state derived from ``(seed, path)``
through splitmix64, so results do not depend on how paths are scheduled.
Normals come from a 256-layer ziggurat whose tables are built here once and
handed to the compiled kernel, keeping the two backends on identical streams.
"""
from __future__ import annotations

import math

import numpy as np

GOLDEN = 0x9E3779B97F4A7C15
PATH_SALT = 0xD1B54A32D192ED03
MASK64 = (1 << 64) - 1

ZIG_R = 3.6541528853610088
ZIG_INV_R = 1.0 / ZIG_R
ZIG_AREA = 0.00492867323399


def _build_ziggurat() -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    m = float(2**52)
    ki = np.zeros(256, dtype=np.uint64)
    wi = np.zeros(256, dtype=np.float64)
    fi = np.zeros(256, dtype=np.float64)
    dn = tn = ZIG_R
    q = ZIG_AREA / math.exp(-0.5 * dn * dn)
    ki[0] = int(dn / q * m)
    ki[1] = 0
    wi[0] = q / m
    wi[255] = dn / m
    fi[0] = 1.0
    fi[255] = math.exp(-0.5 * dn * dn)
    for i in range(254, 0, -1):
        dn = math.sqrt(-2.0 * math.log(ZIG_AREA / dn + math.exp(-0.5 * dn * dn)))
        ki[i + 1] = int(dn / tn * m)
        tn = dn
        fi[i] = math.exp(-0.5 * dn * dn)
        wi[i] = dn / m
    return ki, wi, fi


ZIG_KI, ZIG_WI, ZIG_FI = _build_ziggurat()


def _mix64(z: int) -> int:
    z = (z + GOLDEN) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def path_state(seed: int, path: int) -> tuple[int, int, int, int]:
    """xoshiro256++ state for one path (reference implementation)."""
    st = _mix64(seed & MASK64) ^ _mix64((path ^ PATH_SALT) & MASK64)
    out = []
    for _ in range(4):
        st = (st + GOLDEN) & MASK64
        z = st
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        out.append(z ^ (z >> 31))
    if not any(out):
        out[0] = 1
    return tuple(out)  # type: ignore[return-value]


def _vmix(z: np.ndarray) -> np.ndarray:
    z = z + np.uint64(GOLDEN)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


def path_states(seed: int, paths: np.ndarray) -> np.ndarray:
    """Vectorized :func:`path_state`; returns a ``(4, n)`` uint64 array."""
    paths = np.asarray(paths, dtype=np.uint64)
    key = np.uint64(_mix64(seed & MASK64))
    st = key ^ _vmix(paths ^ np.uint64(PATH_SALT))
    out = np.empty((4, paths.size), dtype=np.uint64)
    for k in range(4):
        st = st + np.uint64(GOLDEN)
        z = st
        z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
        out[k] = z ^ (z >> np.uint64(31))
    zero = ~out.any(axis=0)
    out[0, zero] = 1
    return out


def _rotl(x: np.ndarray, k: int) -> np.ndarray:
    return (x << np.uint64(k)) | (x >> np.uint64(64 - k))


class VecStreams:
    """A bank of independent xoshiro256++ streams advanced selectively."""

    def __init__(self, seed: int, paths: np.ndarray):
        self.s = path_states(seed, paths)

    def next_u64(self, idx: np.ndarray) -> np.ndarray:
        s0, s1, s2, s3 = self.s[0, idx], self.s[1, idx], self.s[2, idx], self.s[3, idx]
        result = _rotl(s0 + s3, 23) + s0
        t = s1 << np.uint64(17)
        s2 = s2 ^ s0
        s3 = s3 ^ s1
        s1 = s1 ^ s2
        s0 = s0 ^ s3
        s2 = s2 ^ t
        s3 = _rotl(s3, 45)
        self.s[0, idx], self.s[1, idx], self.s[2, idx], self.s[3, idx] = s0, s1, s2, s3
        return result

    def next_double(self, idx: np.ndarray) -> np.ndarray:
        return (self.next_u64(idx) >> np.uint64(11)).astype(np.float64) * (1.0 / 9007199254740992.0)

    def normal(self, idx: np.ndarray) -> np.ndarray:
        """Ziggurat normals, one per index, drawing from each stream in scalar order."""
        idx = np.asarray(idx, dtype=np.intp)
        out = np.empty(idx.size, dtype=np.float64)
        pending = np.arange(idx.size)
        while pending.size:
            rows = idx[pending]
            r = self.next_u64(rows)
            layer = (r & np.uint64(0xFF)).astype(np.intp)
            r = r >> np.uint64(8)
            negative = (r & np.uint64(1)).astype(bool)
            rabs = (r >> np.uint64(1)) & np.uint64(0x000FFFFFFFFFFFFF)
            x = rabs.astype(np.float64) * ZIG_WI[layer]
            x = np.where(negative, -x, x)
            accept = rabs < ZIG_KI[layer]
            out[pending[accept]] = x[accept]
            retry = ~accept
            base = retry & (layer == 0)
            wedge = retry & (layer != 0)
            if wedge.any():
                w_rows = rows[wedge]
                lw = layer[wedge]
                u = self.next_double(w_rows)
                ok = (ZIG_FI[lw - 1] - ZIG_FI[lw]) * u + ZIG_FI[lw] < np.exp(-0.5 * x[wedge] * x[wedge])
                out[pending[wedge][ok]] = x[wedge][ok]
                wedge_fail = pending[wedge][~ok]
            else:
                wedge_fail = pending[:0]
            if base.any():
                b_pos = pending[base]
                b_sign = ((rabs[base] >> np.uint64(8)) & np.uint64(1)).astype(bool)
                todo = np.arange(b_pos.size)
                while todo.size:
                    b_rows = idx[b_pos[todo]]
                    xx = -ZIG_INV_R * np.log1p(-self.next_double(b_rows))
                    yy = -np.log1p(-self.next_double(b_rows))
                    ok = yy + yy > xx * xx
                    val = ZIG_R + xx[ok]
                    val = np.where(b_sign[todo[ok]], -val, val)
                    out[b_pos[todo[ok]]] = val
                    todo = todo[~ok]
            pending = np.sort(wedge_fail)
        return out
