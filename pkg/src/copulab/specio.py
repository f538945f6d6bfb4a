"""Parsing of copula, marginal, and perturbation specs used by the CLI.

Copula specs are JSON objects:

    {"type": "pi"} | {"type": "m"} | {"type": "w"}
    {"type": "frank", "lambda": 5.0}
    {"type": "fgm", "theta": 0.5}
    {"type": "mixture", "weights": [0.3, 0.7], "components": [...]}
    {"type": "m-density", "variant": 1, "h": "poly:[0,1]", "g": "poly:[0,0,1]"}

Polynomials are encoded constant-first.  Marginals are compact strings
(``uniform:0,1``, ``normal:0,1``, ``exponential:1.5``) and perturbations are
``kind:theta`` strings (``tilde:0.3``, ``hat:0.5``, ``mesiar:0.7``,
``dolati``).
"""

import json
from dataclasses import dataclass

import numpy as np

from . import core
from .errors import SpecError


def _require(obj, key, kind=None):
    if key not in obj:
        raise SpecError(key, "missing required field")
    value = obj[key]
    if kind is not None and not isinstance(value, kind):
        raise SpecError(key, f"expected {getattr(kind, '__name__', kind)}, got {type(value).__name__}")
    return value


def parse_function(text):
    """Parse a function spec string; currently only ``poly:[c0,c1,...]``."""
    if not isinstance(text, str) or ":" not in text:
        raise SpecError("function", f"expected 'poly:[coefficients]', got {text!r}")
    kind, _, payload = text.partition(":")
    if kind != "poly":
        raise SpecError("function", f"unknown function kind {kind!r}")
    try:
        coeffs = json.loads(payload)
        coeffs = [float(c) for c in coeffs]
    except (ValueError, TypeError) as exc:
        raise SpecError("function", f"bad polynomial coefficients {payload!r}") from exc
    return np.polynomial.Polynomial(coeffs)


def copula_from_spec(obj):
    """Build a copula model from a JSON spec object (or JSON text)."""
    if isinstance(obj, str):
        try:
            obj = json.loads(obj)
        except json.JSONDecodeError as exc:
            raise SpecError("copula", f"not valid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise SpecError("copula", "spec must be a JSON object")
    kind = _require(obj, "type", str).lower()
    if kind in ("pi", "independence", "product"):
        return core.PI
    if kind in ("m", "frechet-m", "min"):
        return core.M
    if kind in ("w", "frechet-w"):
        return core.W
    if kind == "frank":
        lam = _require(obj, "lambda", (int, float))
        if lam == 0:
            raise SpecError("lambda", "must be nonzero")
        return core.Frank(lam)
    if kind == "fgm":
        theta = _require(obj, "theta", (int, float))
        if not 0.0 <= theta <= 1.0:
            raise SpecError("theta", f"must lie in [0, 1], got {theta}")
        return core.FGM(theta)
    if kind == "mixture":
        weights = _require(obj, "weights", list)
        components = _require(obj, "components", list)
        if len(weights) != len(components):
            raise SpecError("weights", "weights and components differ in length")
        try:
            return core.make_mixture([float(w) for w in weights],
                                     [copula_from_spec(c) for c in components])
        except ValueError as exc:
            raise SpecError("weights", str(exc)) from exc
    if kind == "m-density":
        variant = _require(obj, "variant", int)
        if variant not in (1, 2, 3, 4):
            raise SpecError("variant", f"must be 1..4, got {variant}")
        h = parse_function(_require(obj, "h", str))
        g = parse_function(_require(obj, "g", str))
        return core.make_m_copula(core.MDensitySpec(h=h, g=g, variant=variant))
    raise SpecError("type", f"unknown copula type {kind!r}")


@dataclass(frozen=True)
class PerturbationParams:
    """A perturbation kind plus its mixing parameter."""

    kind: str
    theta: float = 0.0

    def __post_init__(self):
        if self.kind not in ("tilde", "hat", "mesiar", "dolati", "none"):
            raise SpecError("perturb", f"unknown perturbation kind {self.kind!r}")
        if not 0.0 <= self.theta <= 1.0:
            raise SpecError("theta", f"must lie in [0, 1], got {self.theta}")


def parse_perturbation(text):
    """Parse a ``kind:theta`` perturbation string."""
    if text is None:
        return PerturbationParams("none")
    kind, _, rest = text.partition(":")
    kind = kind.strip().lower()
    if kind == "dolati":
        return PerturbationParams("dolati")
    if kind == "none":
        return PerturbationParams("none")
    if not rest:
        raise SpecError("perturb", f"{kind!r} needs a parameter, e.g. {kind}:0.5")
    try:
        theta = float(rest)
    except ValueError as exc:
        raise SpecError("perturb", f"bad parameter {rest!r}") from exc
    return PerturbationParams(kind, theta)
