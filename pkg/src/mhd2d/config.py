"""Text configuration files for runs and sweeps.

Run configs are `key = value` lines; `#` starts a comment, blank lines are
ignored, unknown keys are rejected.  Keys (defaults in parentheses; the
first four are required):

    alpha, beta, nu, eta    exponents and coefficients
    n (256)                 grid size, power of two
    dt (2.5e-4)             time step
    t_end (1.0)             final time
    output_every (40)       steps between diagnostic samples
    integrator (if-rk4)     stepping scheme tag
    seed (0)                seed for random initial data
    init (orszag-tang)      initial data kind: orszag-tang | random-band
    amplitude (1.0)         initial-data amplitude
    band (8)                random-band spectral radius

Sweep specs use the same syntax plus `alphas` / `betas` comma lists; the
remaining keys form the base config applied at every (alpha, beta) point.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from . import regimes
from .dynamics import SolverConfig


class ConfigError(ValueError):
    pass


_FLOAT_KEYS = ("alpha", "beta", "nu", "eta", "dt", "t_end", "amplitude")
_INT_KEYS = ("n", "output_every", "seed", "band")
_STR_KEYS = ("integrator", "init")
_REQUIRED = ("alpha", "beta", "nu", "eta")
_ALL_KEYS = set(_FLOAT_KEYS) | set(_INT_KEYS) | set(_STR_KEYS)

_DEFAULTS = {
    "n": 256,
    "dt": 2.5e-4,
    "t_end": 1.0,
    "output_every": 40,
    "integrator": "if-rk4",
    "seed": 0,
    "init": "orszag-tang",
    "amplitude": 1.0,
    "band": 8,
}


def _parse_lines(text: str, path: str, extra_keys=()) -> dict:
    allowed = _ALL_KEYS | set(extra_keys)
    entries = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in allowed:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        if key in entries:
            raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
        entries[key] = (value, lineno)
    return entries


def _convert(entries: dict, path: str) -> dict:
    values = {}
    for key, (text, lineno) in entries.items():
        try:
            if key in _FLOAT_KEYS:
                values[key] = float(text)
            elif key in _INT_KEYS:
                values[key] = int(text)
            else:
                values[key] = text
        except ValueError:
            raise ConfigError(f"{path}:{lineno}: cannot parse {key} value {text!r}") from None
    return values


def _build_config(values: dict, path: str) -> SolverConfig:
    missing = [k for k in _REQUIRED if k not in values]
    if missing:
        raise ConfigError(f"{path}: missing required keys: {', '.join(missing)}")
    merged = dict(_DEFAULTS)
    merged.update(values)
    kind = merged.pop("init")
    try:
        return SolverConfig(init_kind=kind, **merged)
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def parse_config(path) -> SolverConfig:
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    entries = _parse_lines(text, str(path))
    return _build_config(_convert(entries, str(path)), str(path))


def emit_config(config: SolverConfig) -> str:
    """Serialize a config so parse_config reproduces it exactly (floats via
    shortest round-trip decimals)."""
    lines = []
    for key in _FLOAT_KEYS:
        lines.append(f"{key} = {getattr(config, key)!r}")
    for key in _INT_KEYS:
        lines.append(f"{key} = {getattr(config, key)}")
    lines.append(f"integrator = {config.integrator}")
    lines.append(f"init = {config.init_kind}")
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class SweepSpec:
    """Grid of (alpha, beta) points over a shared base config."""

    alphas: tuple
    betas: tuple
    base: SolverConfig

    def points(self):
        """(alpha, beta, config, regime tag) for every grid point."""
        out = []
        for a in self.alphas:
            for b in self.betas:
                cfg = replace(self.base, alpha=a, beta=b)
                tag = regimes.classify_regime(a, b, cfg.nu, cfg.eta)
                out.append((a, b, cfg, tag))
        return out


def parse_sweep(path) -> SweepSpec:
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    entries = _parse_lines(text, str(path), extra_keys=("alphas", "betas"))
    lists = {}
    for key in ("alphas", "betas"):
        if key not in entries:
            raise ConfigError(f"{path}: sweep spec needs a {key!r} list")
        raw, lineno = entries.pop(key)
        try:
            lists[key] = tuple(float(tok.strip()) for tok in raw.split(",") if tok.strip())
        except ValueError:
            raise ConfigError(f"{path}:{lineno}: cannot parse {key} list {raw!r}") from None
        if not lists[key]:
            raise ConfigError(f"{path}:{lineno}: empty {key} list")
    values = _convert(entries, str(path))
    missing = [k for k in ("nu", "eta") if k not in values]
    if missing:
        raise ConfigError(f"{path}: missing required keys: {', '.join(missing)}")
    for a in lists["alphas"]:
        if values["nu"] == 0.0 and a != 0.0:
            raise ConfigError(f"{path}: alpha={a} with nu=0 (alpha must be 0 when nu=0)")
    # alpha/beta are replaced per point; accept a base without them.
    values.setdefault("alpha", lists["alphas"][0])
    values.setdefault("beta", lists["betas"][0])
    base = _build_config(values, str(path))
    return SweepSpec(alphas=lists["alphas"], betas=lists["betas"], base=base)
