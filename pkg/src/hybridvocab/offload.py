"""Closed-form model of host->device sub-head transfer overlapped with prefill.

All times are exact rationals (``Fraction``) so that the hidden/exposed
decision and the break-even row count never disagree through rounding.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Real
from pathlib import Path

from .errors import ConfigError, ParseError


def _positive(name, value):
    if isinstance(value, bool) or not isinstance(value, Real) or not value > 0 or not math.isfinite(value):
        raise ConfigError(f"{name} must be a positive finite number, got {value!r}")
    return Fraction(value)


def _non_negative(name, value):
    if isinstance(value, bool) or not isinstance(value, Real) or not value >= 0 or not math.isfinite(value):
        raise ConfigError(f"{name} must be a non-negative finite number, got {value!r}")
    return Fraction(value)


@dataclass(frozen=True)
class HardwareModel:
    link_bandwidth: float  # bytes / s, host -> device
    device_flops: float  # FLOP / s
    host_lookup_latency: float  # s per token, embedding gather on host

    def __post_init__(self):
        for name in ("link_bandwidth", "device_flops", "host_lookup_latency"):
            _positive(name, getattr(self, name))

    @classmethod
    def from_json(cls, data: dict, path="<hardware>") -> HardwareModel:
        try:
            return cls(data["link_bandwidth"], data["device_flops"], data["host_lookup_latency"])
        except (KeyError, TypeError) as e:
            raise ParseError(f"malformed hardware model: {e!r}", path) from None

    def to_json(self) -> dict:
        return dict(self.__dict__)


# Illustrative only: PCIe-4.0-x16-class link and an edge-class accelerator.
DEFAULT_HARDWARE = HardwareModel(link_bandwidth=16e9, device_flops=20e12, host_lookup_latency=1e-7)


@dataclass(frozen=True)
class OverlapTimeline:
    transfer_time: Fraction
    prefill_time: Fraction
    embedding_time: Fraction

    @property
    def exposed_latency(self) -> Fraction:
        return max(Fraction(0), self.transfer_time - self.prefill_time)

    @property
    def hidden(self) -> bool:
        return self.exposed_latency == 0

    def to_json(self) -> dict:
        return {
            "transfer_time": float(self.transfer_time),
            "prefill_time": float(self.prefill_time),
            "embedding_time": float(self.embedding_time),
            "exposed_latency": float(self.exposed_latency),
            "hidden": self.hidden,
        }


def _check_shape(d, dtype_bytes, prompt_len, model_flops_per_token):
    _positive("d", d)
    _positive("dtype_bytes", dtype_bytes)
    _non_negative("prompt_len", prompt_len)
    _non_negative("model_flops_per_token", model_flops_per_token)


def simulate(hw: HardwareModel, plan_size: int, d: int, dtype_bytes: int, prompt_len: int,
             model_flops_per_token: float) -> OverlapTimeline:
    _check_shape(d, dtype_bytes, prompt_len, model_flops_per_token)
    if plan_size < 0:
        raise ConfigError(f"plan_size must be >= 0, got {plan_size}")
    return OverlapTimeline(
        transfer_time=Fraction(plan_size * d * dtype_bytes) / Fraction(hw.link_bandwidth),
        prefill_time=Fraction(prompt_len) * Fraction(model_flops_per_token) / Fraction(hw.device_flops),
        embedding_time=Fraction(prompt_len) * Fraction(hw.host_lookup_latency),
    )


def breakeven_rows(hw: HardwareModel, d: int, dtype_bytes: int, prompt_len: int,
                   model_flops_per_token: float) -> int:
    """Largest number of sub-head rows whose transfer is fully hidden by prefill."""
    tl = simulate(hw, 0, d, dtype_bytes, prompt_len, model_flops_per_token)
    row_time = Fraction(d * dtype_bytes) / Fraction(hw.link_bandwidth)
    return math.floor(tl.prefill_time / row_time)


def load_hardware(path) -> HardwareModel:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ParseError(e.msg, f"{path}:{e.lineno}:{e.colno}") from None
    return HardwareModel.from_json(data, str(path))
