"""Flat key = value config files (INI sections) and object builders."""

import configparser
from fractions import Fraction

import numpy as np

from .domain import make_domain
from .errors import ConfigError
from .levy import make_levy_model
from .sde import Coefficients, Policy, SimulationSpec


def parse_scalar(s):
    s = s.strip()
    low = s.lower()
    if low in ("true", "yes", "on"):
        return True
    if low in ("false", "no", "off"):
        return False
    if low in ("inf", "+inf"):
        return float("inf")
    try:
        if "/" in s:
            return Fraction(s)
        if any(c in s for c in ".eE"):
            return float(s)
        return int(s)
    except ValueError:
        return s


def parse_value(s):
    s = s.strip()
    if ";" in s:
        return tuple(parse_value(p) for p in s.split(";") if p.strip())
    if "," in s:
        return tuple(parse_scalar(p) for p in s.split(",") if p.strip())
    return parse_scalar(s)


def load_config(path_or_text, is_text=False):
    cp = configparser.ConfigParser()
    try:
        if is_text:
            cp.read_string(path_or_text)
        else:
            with open(path_or_text) as fh:
                cp.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    return {sec: {k: parse_value(v) for k, v in cp[sec].items()}
            for sec in cp.sections()}


def build_domain(cfg):
    if "domain" not in cfg:
        return None
    spec = dict(cfg["domain"])
    if spec.get("type") == "none":
        return None
    try:
        return make_domain(spec)
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"bad [domain] section: {exc}") from exc


def build_levy(cfg):
    try:
        return make_levy_model(dict(cfg.get("levy", {"kind": "none"})))
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"bad [levy] section: {exc}") from exc


def build_policy(cfg, dim):
    sec = dict(cfg.get("policy", {"kind": "constant", "a": 0.0}))
    kind = sec.get("kind", "constant")
    try:
        if kind == "constant":
            return Policy.constant(sec["a"], dim=dim)
        if kind == "clamped_affine":
            c1 = sec["c1"]
            c1 = c1 if isinstance(c1, tuple) else (c1,)
            return Policy.clamped_affine(sec["c0"], c1, sec["lo"], sec["hi"])
        if kind == "grid":
            return Policy.interpolated(sec["xs"], sec["ys"], sec["lo"],
                                       sec["hi"])
    except KeyError as exc:
        raise ConfigError(f"[policy] missing key {exc}") from exc
    raise ConfigError(f"unknown policy kind {kind!r}")


def _vec(v, d):
    arr = np.zeros(d)
    arr[...] = np.asarray(v if isinstance(v, tuple) else (v,), dtype=float)
    return arr


def _mat(v, d, k):
    arr = np.zeros((d, k))
    if k == 0:
        return arr
    raw = np.asarray(v, dtype=float)
    if raw.size == 1:
        arr[...] = raw  # scalar broadcast
    else:
        arr[...] = raw.reshape(d, k)
    return arr


def build_coefficients(cfg):
    sec = dict(cfg.get("coefficients", {}))
    d = int(sec.get("dim", 1))
    k = int(sec.get("k", 0))
    try:
        return Coefficients(
            b0=_vec(sec.get("b0", 0.0), d), b1=_vec(sec.get("b1", 0.0), d),
            s0=_mat(sec.get("s0", 0.0), d, k),
            s1=_mat(sec.get("s1", 0.0), d, k),
            a_lo=float(sec.get("a_lo", -1.0)),
            a_hi=float(sec.get("a_hi", 1.0)))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad [coefficients] section: {exc}") from exc


def build_simulation(cfg):
    run = dict(cfg.get("run", {}))
    coeffs = build_coefficients(cfg)
    domain = build_domain(cfg)
    levy = build_levy(cfg)
    policy = build_policy(cfg, coeffs.dim)
    if getattr(levy, "dim", coeffs.dim) != coeffs.dim:
        raise ConfigError("levy model and coefficients disagree on dim")
    return SimulationSpec(
        domain=domain, policy=policy, coeffs=coeffs, levy=levy,
        dt=float(run.get("dt", 1e-3)),
        horizon=float(run.get("horizon", 50.0)),
        jump_mark_threshold=float(run.get("jump_mark_threshold", 0.05)),
        backend=str(run.get("backend", "auto")))
