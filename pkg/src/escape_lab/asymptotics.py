"""Symbolic volume-growth classes and upper-rate-function forms."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = ["VolumeClass", "RateForm", "AsymptoticClass"]


@dataclass(frozen=True)
class VolumeClass:
    """Growth of ``log mu(B(r))`` for large ``r``.

    kinds:
      ``polynomial``      mu(B(r)) <= C r^D                    (exponent = D)
      ``stretched_exp``   log mu(B(r)) ~ r^a (log r)^b          (exponent = a, log_power = b)
      ``gaussian``        log mu(B(r)) ~ r^2
      ``gaussian_log``    log mu(B(r)) ~ r^2 log r
      ``super_gaussian``  log mu(B(r)) ~ exp(c r^a), or faster  (exponent = a, ``nested`` levels)
      ``infinite``        sup d_sigma < infinity, balls eventually have infinite measure
    """

    kind: str
    exponent: float | None = None
    log_power: float = 0.0
    nested: int = 1

    def __str__(self) -> str:
        if self.kind == "polynomial":
            return f"polynomial(D={_fmt(self.exponent)})"
        if self.kind == "stretched_exp":
            s = f"log mu ~ r^{_fmt(self.exponent)}"
            if self.log_power:
                s += f" (log r)^{_fmt(self.log_power)}"
            return s
        if self.kind == "gaussian":
            return "log mu ~ r^2"
        if self.kind == "gaussian_log":
            return "log mu ~ r^2 log r"
        if self.kind == "super_gaussian":
            inner = f"c r^{_fmt(self.exponent)}"
            for _ in range(self.nested):
                inner = f"exp({inner})"
            return f"log mu ~ {inner}"
        return "infinite (sup d_sigma < inf)"


@dataclass(frozen=True)
class RateForm:
    """Closed-form upper rate function ``phi(t)`` up to its constant.

    kinds and meaning of ``power``/``log_power``:
      ``sqrt_t_log_t``  c sqrt(t log t)
      ``power_log``     c t^power (log t)^log_power
      ``exp_power``     exp(c t^power)
      ``exp``           exp(c t)
      ``exp_exp``       exp(exp(c t))
    """

    kind: str
    power: float = 1.0
    log_power: float = 0.0

    @property
    def tag(self) -> str:
        if self.kind == "sqrt_t_log_t":
            return "c*sqrt(t*log(t))"
        if self.kind == "power_log":
            s = "c*t" if self.power == 1 else f"c*t^{_fmt(self.power)}"
            if self.log_power:
                s += f"*log(t)^{_fmt(self.log_power)}"
            return s
        if self.kind == "exp_power":
            return f"exp(c*t^{_fmt(self.power)})"
        if self.kind == "exp":
            return "exp(c*t)"
        if self.kind == "exp_exp":
            return "exp(exp(c*t))"
        raise ValueError(self.kind)

    def __str__(self) -> str:
        return self.tag

    def __call__(self, t, c: float = 1.0):
        t = np.asarray(t, dtype=float)
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            if self.kind == "sqrt_t_log_t":
                return c * np.sqrt(t * np.log(t))
            if self.kind == "power_log":
                return c * t**self.power * np.log(t) ** self.log_power
            if self.kind == "exp_power":
                return np.exp(c * t**self.power)
            if self.kind == "exp":
                return np.exp(c * t)
            if self.kind == "exp_exp":
                return np.exp(np.exp(c * t))
        raise ValueError(self.kind)


@dataclass(frozen=True)
class AsymptoticClass:
    volume_class: VolumeClass
    conservative: str  # "yes" | "no" | "outside-theorem"
    rate_form: RateForm | None = None
    sharp: bool | None = True  # None: sharpness not discussed for the family
    notes: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if self.conservative not in ("yes", "no", "outside-theorem"):
            raise ValueError(f"bad conservativeness verdict {self.conservative!r}")
        if self.rate_form is not None and self.conservative != "yes":
            raise ValueError("a rate form is only attached to conservative regimes")


def _fmt(x) -> str:
    if x is None:
        return "?"
    if float(x).is_integer():
        return str(int(x))
    return f"{x:.4g}"


def same_number(a: float, b: float) -> bool:
    return math.isclose(a, b, rel_tol=0, abs_tol=1e-12)
