# src/schema.py
"""Scenario documents (JSON) and their translation into ChannelScenario."""
from __future__ import annotations
import json
from dataclasses import dataclass
from typing import Any, Dict, List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, NonNegativeFloat, ValidationError, model_validator

from .errors import ConfigError, GramError
from .hermitian_kernel import HermitianGram
from .scenarios import ChannelScenario, isi_scenario, mac_scenario, mimo_scenario

# complex numbers travel as [re, im]
ComplexPair = Tuple[float, float]
ComplexMatrix = List[List[ComplexPair]]

_CHANNEL_KEYS = {"isi": "taps", "mimo": "H", "mac": "gains"}


# ---------- Models ----------
class OutputsConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    dir: Optional[str] = None
    prefix: str = ""


class ScenarioConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["isi", "mimo", "mac"]
    taps: Optional[List[ComplexPair]] = None
    H: Optional[ComplexMatrix] = None
    gains: Optional[List[ComplexPair]] = None
    block_length: Optional[int] = Field(default=None, gt=0)
    powers: Optional[List[NonNegativeFloat]] = None
    input_gram: Optional[ComplexMatrix] = None
    noise_variance: Optional[float] = Field(default=None, gt=0)
    noise_gram: Optional[ComplexMatrix] = None
    groups: Optional[List[List[str]]] = None
    order: List[str]
    seed: Optional[int] = Field(default=None, ge=0, lt=2 ** 64)
    trials: Optional[int] = Field(default=None, gt=0)
    log_base: Literal["bits", "nats"] = "bits"
    outputs: Optional[OutputsConfig] = None

    @model_validator(mode="after")
    def _channel_keys(self) -> "ScenarioConfig":
        wanted = _CHANNEL_KEYS[self.kind]
        for key in _CHANNEL_KEYS.values():
            present = getattr(self, key) is not None
            if key == wanted and not present:
                raise ValueError(f"{key}: required for kind {self.kind!r}")
            if key != wanted and present:
                raise ValueError(f"{key}: not allowed for kind {self.kind!r}")
        if self.kind == "isi" and self.block_length is None:
            raise ValueError("block_length: required for kind 'isi'")
        if self.kind != "isi" and self.block_length is not None:
            raise ValueError(f"block_length: not allowed for kind {self.kind!r}")
        if self.powers is not None and self.input_gram is not None:
            raise ValueError("powers: give either powers or input_gram, not both")
        if self.noise_variance is not None and self.noise_gram is not None:
            raise ValueError("noise_variance: give either noise_variance or noise_gram, not both")
        return self


@dataclass(frozen=True, eq=False)
class ParsedConfig:
    config: ScenarioConfig
    scenario: ChannelScenario
    order: Tuple[str, ...]


# ---------- Helpers ----------
def _complex_vector(pairs: List[ComplexPair]) -> np.ndarray:
    return np.array([complex(re, im) for re, im in pairs], dtype=np.complex128)


def _complex_matrix(rows: ComplexMatrix, key: str) -> np.ndarray:
    widths = {len(r) for r in rows}
    if len(widths) > 1:
        raise ConfigError("rows have different lengths", key=key)
    return np.array([[complex(re, im) for re, im in r] for r in rows], dtype=np.complex128)


def _gram(rows: Optional[ComplexMatrix], key: str) -> Optional[HermitianGram]:
    if rows is None:
        return None
    m = _complex_matrix(rows, key)
    try:
        return HermitianGram(m)
    except GramError as exc:
        raise ConfigError(f"failed Hermitian/PSD check: {exc}", key=key) from exc


def _validation_message(exc: ValidationError) -> Tuple[str, Optional[str]]:
    err = exc.errors()[0]
    loc = ".".join(str(p) for p in err.get("loc", ()))
    msg = err.get("msg", "invalid value")
    if msg.startswith("Value error, "):
        msg = msg[len("Value error, "):]
    return msg, loc or None


# ---------- Public API ----------
def validate_document(data: Dict[str, Any]) -> ScenarioConfig:
    try:
        return ScenarioConfig.model_validate(data)
    except ValidationError as exc:
        msg, key = _validation_message(exc)
        raise ConfigError(msg, key=key) from exc


def build_scenario(cfg: ScenarioConfig) -> ChannelScenario:
    input_gram = _gram(cfg.input_gram, "input_gram")
    noise_gram = _gram(cfg.noise_gram, "noise_gram")
    common = dict(
        powers=cfg.powers,
        noise_variance=cfg.noise_variance,
        input_gram=input_gram,
        noise_gram=noise_gram,
        groups=cfg.groups,
    )
    key = _CHANNEL_KEYS[cfg.kind]
    try:
        if cfg.kind == "isi":
            return isi_scenario(_complex_vector(cfg.taps), cfg.block_length, **common)
        if cfg.kind == "mimo":
            return mimo_scenario(_complex_matrix(cfg.H, "H"), **common)
        return mac_scenario(_complex_vector(cfg.gains), **common)
    except ConfigError:
        raise
    except (GramError, ValueError) as exc:
        raise ConfigError(str(exc), key="groups" if "group" in str(exc) else key) from exc


def parse_config(text: str) -> ParsedConfig:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise ConfigError("top level must be a JSON object")
    cfg = validate_document(data)
    scenario = build_scenario(cfg)
    if sorted(cfg.order) != sorted(scenario.group_names) or len(set(cfg.order)) != len(cfg.order):
        raise ConfigError(f"must list every group exactly once: {scenario.group_names}", key="order")
    return ParsedConfig(cfg, scenario, tuple(cfg.order))


def with_overrides(cfg: ScenarioConfig, **updates: Any) -> ScenarioConfig:
    data = cfg.model_dump(mode="json", exclude_none=True)
    data.update({k: v for k, v in updates.items() if v is not None})
    return validate_document(data)


def canonical_json(cfg: ScenarioConfig) -> str:
    return json.dumps(cfg.model_dump(mode="json", exclude_defaults=True), sort_keys=True, indent=2) + "\n"
