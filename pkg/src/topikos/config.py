"""Application configuration.

One JSON document holds every tunable; nothing is hard-coded elsewhere.
Resolution order is flags > environment > config file > defaults.  The
environment can override the listen address and the data directory via
``TOPIKOS_LISTEN`` and ``TOPIKOS_DATA_DIR``.
"""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field
from typing import Any, Mapping

from .embedding import DEFAULT_DIM, ProviderConfig, ProviderKind
from .errors import ConfigError
from .retrieval import RerankParams

ENV_DATA_DIR = "TOPIKOS_DATA_DIR"
ENV_LISTEN = "TOPIKOS_LISTEN"


@dataclass(frozen=True)
class RetrievalConfig:
    k: int = 10
    display: int = 5
    phase1_tau: float = 0.15
    phase2_tau: float = 0.1
    stringent_tau: float = 0.05
    seed: int = 42


@dataclass(frozen=True)
class DialogueConfig:
    context_lambda: float = 0.4
    stringent_threshold: float = 0.25

    def __post_init__(self):
        if not (0.0 <= self.context_lambda <= 1.0):
            raise ConfigError("context_lambda must be in [0, 1]")


@dataclass(frozen=True)
class ExplainerConfig:
    kind: str = "template"  # template | remote
    endpoint: str = ""
    timeout: float = 5.0

    def __post_init__(self):
        if self.kind not in ("template", "remote"):
            raise ConfigError(f"unknown explainer kind {self.kind!r}")
        if self.kind == "remote" and not self.endpoint:
            raise ConfigError("remote explainer requires an endpoint")


@dataclass(frozen=True)
class AppConfig:
    data_dir: str = "data"
    listen: str = "127.0.0.1:8080"
    provider: ProviderConfig = field(default_factory=ProviderConfig)
    retrieval: RetrievalConfig = field(default_factory=RetrievalConfig)
    rerank: RerankParams = field(default_factory=RerankParams)
    dialogue: DialogueConfig = field(default_factory=DialogueConfig)
    explainer: ExplainerConfig = field(default_factory=ExplainerConfig)

    def to_dict(self) -> dict[str, Any]:
        doc = asdict(self)
        doc["provider"] = {
            "kind": self.provider.kind.value,
            "dim": self.provider.dim,
            "endpoint": self.provider.endpoint,
            "model_name": self.provider.model_name,
            "timeout": self.provider.timeout,
            "max_inflight": self.provider.max_inflight,
        }
        return doc


def config_from_dict(doc: Mapping[str, Any]) -> AppConfig:
    """Build a config from a (possibly partial) plain dict."""
    known = {"data_dir", "listen", "provider", "retrieval", "rerank", "dialogue", "explainer"}
    unknown = set(doc) - known
    if unknown:
        raise ConfigError(f"unknown config field(s): {sorted(unknown)}")
    try:
        provider = _provider_from_dict(doc.get("provider", {}))
        return AppConfig(
            data_dir=str(doc.get("data_dir", AppConfig.data_dir)),
            listen=str(doc.get("listen", AppConfig.listen)),
            provider=provider,
            retrieval=_section(RetrievalConfig, doc.get("retrieval", {})),
            rerank=_section(RerankParams, doc.get("rerank", {})),
            dialogue=_section(DialogueConfig, doc.get("dialogue", {})),
            explainer=_section(ExplainerConfig, doc.get("explainer", {})),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid config: {exc}") from exc


def _provider_from_dict(raw: Mapping[str, Any]) -> ProviderConfig:
    kind_raw = raw.get("kind", "local")
    try:
        kind = ProviderKind(kind_raw)
    except ValueError:
        raise ConfigError(f"unknown provider kind {kind_raw!r}") from None
    return ProviderConfig(
        kind=kind,
        dim=int(raw.get("dim", DEFAULT_DIM)),
        endpoint=str(raw.get("endpoint", "")),
        model_name=str(raw.get("model_name", "")),
        timeout=float(raw.get("timeout", 10.0)),
        max_inflight=int(raw.get("max_inflight", 4)),
    )


def _section(cls, raw: Mapping[str, Any]):
    if not isinstance(raw, Mapping):
        raise ConfigError(f"{cls.__name__} section must be an object")
    allowed = set(cls.__dataclass_fields__)
    unknown = set(raw) - allowed
    if unknown:
        raise ConfigError(f"{cls.__name__}: unknown field(s) {sorted(unknown)}")
    return cls(**raw)


def merge_overrides(config: AppConfig, overrides: Mapping[str, Any]) -> AppConfig:
    """Apply a partial config dict (e.g. a per-session request) on top."""
    base = config.to_dict()
    for key, value in overrides.items():
        if isinstance(value, Mapping) and isinstance(base.get(key), dict):
            base[key] = {**base[key], **value}
        else:
            base[key] = value
    return config_from_dict(base)


def load_config(
    path: str | None = None,
    env: Mapping[str, str] | None = None,
    overrides: Mapping[str, Any] | None = None,
) -> AppConfig:
    env = os.environ if env is None else env
    doc: dict[str, Any] = {}
    if path:
        try:
            with open(path, encoding="utf-8") as fh:
                doc = json.load(fh)
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file is not valid JSON: {exc}") from None
        # A relative data_dir in a file is relative to the file, not the CWD.
        if "data_dir" in doc and not os.path.isabs(doc["data_dir"]):
            doc["data_dir"] = os.path.normpath(
                os.path.join(os.path.dirname(os.path.abspath(path)), doc["data_dir"])
            )
    config = config_from_dict(doc)
    if ENV_DATA_DIR in env:
        config = merge_overrides(config, {"data_dir": env[ENV_DATA_DIR]})
    if ENV_LISTEN in env:
        config = merge_overrides(config, {"listen": env[ENV_LISTEN]})
    if overrides:
        config = merge_overrides(config, overrides)
    return config
