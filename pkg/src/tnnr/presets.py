"""String grammar for penalties, weight presets and masks (shared by the CLI and estimator).

penalty   ``identity`` | ``power23`` | ``smooth23`` | ``smooth23:EPS``
preset    ``tnnr`` | ``tnn`` | ``pstnn:N`` | ``ttnn:N`` | ``wtnn:EPS`` | ``wsp:P,C,EPS``
mask      ``uniform:SR`` | ``rect:I,J,H,W`` | ``grid:P,T``
"""

from . import penalty as _penalty
from .completion import structured_mask
from .exceptions import ConfigError
from .wtsvt import preset_scheme

DEFAULT_SMOOTHING = 1e-6


def _split(text):
    name, _, args = text.strip().partition(":")
    values = [a for a in args.split(",") if a] if args else []
    return name.lower(), values


def _numbers(values, n, text, kind=float):
    if len(values) != n:
        raise ConfigError(f"{text!r}: expected {n} parameter(s), got {len(values)}")
    try:
        return [kind(v) for v in values]
    except ValueError as exc:
        raise ConfigError(f"{text!r}: {exc}") from exc


def parse_penalty(text):
    name, values = _split(text)
    if name == "identity" and not values:
        return _penalty.identity()
    if name == "power23" and not values:
        return _penalty.power(2.0 / 3.0)
    if name == "smooth23":
        eps = _numbers(values, 1, text)[0] if values else DEFAULT_SMOOTHING
        return _penalty.smoothed_power(2.0 / 3.0, eps)
    raise ConfigError(f"unknown penalty {text!r}")


def parse_preset(text):
    """Return ``(tag, params)``; ``tag`` is ``"tnnr"`` or a static preset tag."""
    name, values = _split(text)
    if name in ("tnnr", "tnn") and not values:
        return name, {}
    if name in ("pstnn", "ttnn"):
        return name, ({"N": _numbers(values, 1, text, int)[0]} if values else {})
    if name == "wtnn":
        return name, ({"eps": _numbers(values, 1, text)[0]} if values else {})
    if name == "wsp":
        p, c, eps = _numbers(values, 3, text)
        return name, {"p": p, "c": c, "eps": eps}
    raise ConfigError(f"unknown preset {text!r}")


def build_weights(preset, dims, reference):
    """``"adaptive"`` for TNNR, otherwise the static scheme of the preset."""
    tag, params = parse_preset(preset) if isinstance(preset, str) else preset
    if tag == "tnnr":
        return "adaptive"
    return preset_scheme(tag, dims, reference=reference, **params)


def parse_mask(text, dims, seed):
    name, values = _split(text)
    if name == "uniform":
        return structured_mask("uniform", dims, seed=seed, sr=_numbers(values, 1, text)[0])
    if name in ("rect", "rectangle"):
        i0, j0, h, w = _numbers(values, 4, text, int)
        return structured_mask("rectangle", dims, i0=i0, j0=j0, h=h, w=w)
    if name == "grid":
        period, thickness = _numbers(values, 2, text, int)
        return structured_mask("grid", dims, period=period, thickness=thickness)
    raise ConfigError(f"unknown mask kind {text!r}")
