"""Binary checkpoint format for simulation states.

Little-endian layout:

    magic   4 bytes   b"MHD2"
    version u32       1
    n       u32       grid size
    t       f64       state time
    alpha   f64       dissipation exponent
    beta    f64       diffusion exponent
    nu      f64       dissipation coefficient
    eta     f64       diffusion coefficient
    w       n*n*(re f64, im f64) row-major, wavenumber index order
    j       n*n*(re f64, im f64) same

Round trips are bit-exact.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from . import spectral as sp
from .dynamics import MHDState

MAGIC = b"MHD2"
VERSION = 1
_HEADER = struct.Struct("<4sII5d")


class CheckpointFormatError(ValueError):
    pass


@dataclass(frozen=True)
class Checkpoint:
    state: MHDState
    alpha: float
    beta: float
    nu: float
    eta: float


def write_checkpoint(path, state: MHDState, config) -> None:
    n = state.grid.n
    header = _HEADER.pack(
        MAGIC, VERSION, n, state.t, config.alpha, config.beta, config.nu, config.eta
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(state.w.coef, dtype="<c16").tobytes())
        fh.write(np.ascontiguousarray(state.j.coef, dtype="<c16").tobytes())


def read_checkpoint(path) -> Checkpoint:
    with open(path, "rb") as fh:
        raw = fh.read(_HEADER.size)
        if len(raw) < _HEADER.size:
            raise CheckpointFormatError("truncated header")
        magic, version, n, t, alpha, beta, nu, eta = _HEADER.unpack(raw)
        if magic != MAGIC:
            raise CheckpointFormatError(f"bad magic {magic!r}")
        if version != VERSION:
            raise CheckpointFormatError(f"unsupported format version {version}")
        body = fh.read()
    expected = 2 * n * n * 16
    if len(body) != expected:
        raise CheckpointFormatError(f"payload is {len(body)} bytes, expected {expected}")
    coefs = np.frombuffer(body, dtype="<c16").astype(np.complex128)
    grid = sp.TorusGrid(n)
    w = sp.SpectralField(grid, coefs[: n * n].reshape(n, n), dealiased=True)
    j = sp.SpectralField(grid, coefs[n * n :].reshape(n, n), dealiased=True)
    for name, f in (("w", w), ("j", j)):
        top = float(np.max(np.abs(f.coef)))
        if top > 0 and f.hermitian_defect() > 1e-10 * top:
            raise CheckpointFormatError(f"{name} coefficients are not Hermitian-symmetric")
    state = MHDState(t=t, w=w, j=j)
    return Checkpoint(state=state, alpha=alpha, beta=beta, nu=nu, eta=eta)
