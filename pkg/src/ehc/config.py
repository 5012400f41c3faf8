"""Configuration file loading.

One JSON document drives everything: the remote sources to sync, the
region boundary file, peak-detection and threshold tunables, the privacy
policy, the color anchors, and where snapshots live. A SHA-256 digest of
the canonicalized document is stamped into every snapshot so published
data is traceable to the configuration that produced it.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

from .canonical import canonical_bytes
from .deidentify import PrivacyPolicy
from .errors import ConfigError
from .geo import DEFAULT_REGION_ID_PROPERTY
from .ingest import SourceConfig
from .stats import (
    DEFAULT_PM_THRESHOLD,
    ColorScale,
    PeakParams,
)

STORAGE_ROOT_ENV = "EHC_STORAGE_ROOT"
DEFAULT_STORAGE_ROOT = "snapshots"

PLACEMENT_MODES = ("combined", "indoor_only", "outdoor_only")


@dataclass(frozen=True)
class AppConfig:
    """Validated contents of the configuration file."""

    sources: tuple[SourceConfig, ...]
    boundaries_path: str
    region_id_property: str = DEFAULT_REGION_ID_PROPERTY
    peak_params: PeakParams = field(default_factory=PeakParams)
    pm_threshold_ug_m3: float = DEFAULT_PM_THRESHOLD
    placement_mode: str = "combined"
    privacy: PrivacyPolicy = field(default_factory=PrivacyPolicy)
    color_scale: ColorScale = field(default_factory=ColorScale)
    storage_root: str = DEFAULT_STORAGE_ROOT
    digest: str = ""

    def __post_init__(self) -> None:
        if not self.sources:
            raise ConfigError("at least one source is required")
        if not self.boundaries_path:
            raise ConfigError("boundaries path is required")
        if self.pm_threshold_ug_m3 <= 0:
            raise ConfigError("pm_threshold_ug_m3 must be positive")
        if self.placement_mode not in PLACEMENT_MODES:
            raise ConfigError(f"placement_mode must be one of {PLACEMENT_MODES}")


def load_config(path: str | Path) -> AppConfig:
    """Read and validate the configuration file.

    Relative paths inside the document (boundaries, storage root) resolve
    against the config file's directory. EHC_STORAGE_ROOT in the
    environment overrides the configured storage root.
    """
    path = Path(path)
    try:
        raw = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("config document must be a JSON object")
    return parse_config(doc, base_dir=path.parent)


def parse_config(doc: Mapping[str, Any], base_dir: Path | None = None) -> AppConfig:
    """Build an AppConfig from a parsed JSON document."""
    base = base_dir or Path(".")
    try:
        sources = tuple(_parse_source(s) for s in _require(doc, "sources", list))
        boundaries_raw = _require(doc, "boundaries", str)
        if not boundaries_raw:
            raise ConfigError("boundaries path is required")
        boundaries_path = str(_resolve(base, boundaries_raw))
        region_id_property = str(doc.get("region_id_property", DEFAULT_REGION_ID_PROPERTY))

        peaks_doc = doc.get("peaks", {})
        peak_params = PeakParams(
            delta=float(peaks_doc.get("delta", PeakParams.delta)),
            min_separation_s=int(peaks_doc.get("min_separation_s", PeakParams.min_separation_s)),
            baseline=str(peaks_doc.get("baseline", PeakParams.baseline)),
        )

        privacy_doc = doc.get("privacy", {})
        privacy = PrivacyPolicy(
            k_min=int(privacy_doc.get("k_min", PrivacyPolicy.k_min)),
            strip_coordinates=bool(
                privacy_doc.get("strip_coordinates", PrivacyPolicy.strip_coordinates)
            ),
        )

        anchors_doc = doc.get("color_anchors")
        if anchors_doc is None:
            color_scale = ColorScale()
        else:
            color_scale = ColorScale(
                anchors=tuple((float(z), str(color)) for z, color in anchors_doc)
            )

        storage_root = os.environ.get(STORAGE_ROOT_ENV) or str(
            _resolve(base, str(doc.get("storage_root", DEFAULT_STORAGE_ROOT)))
        )

        config = AppConfig(
            sources=sources,
            boundaries_path=boundaries_path,
            region_id_property=region_id_property,
            peak_params=peak_params,
            pm_threshold_ug_m3=float(doc.get("pm_threshold_ug_m3", DEFAULT_PM_THRESHOLD)),
            placement_mode=str(doc.get("placement_mode", "combined")),
            privacy=privacy,
            color_scale=color_scale,
            storage_root=storage_root,
            digest=config_digest(doc),
        )
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad configuration: {exc}") from exc
    return config


def config_digest(doc: Mapping[str, Any]) -> str:
    """SHA-256 of the canonicalized configuration document."""
    return hashlib.sha256(canonical_bytes(_jsonable(doc))).hexdigest()


def _parse_source(entry: Any) -> SourceConfig:
    if not isinstance(entry, dict):
        raise ConfigError("each source must be a JSON object")
    return SourceConfig(
        source_id=str(_require(entry, "source_id", str)),
        kind=str(_require(entry, "kind", str)),
        url=str(_require(entry, "url", str)),
        refresh_interval_s=int(entry.get("refresh_interval_s", SourceConfig.refresh_interval_s)),
    )


def _require(doc: Mapping[str, Any], key: str, kind: type) -> Any:
    if key not in doc:
        raise ConfigError(f"missing required config key {key!r}")
    value = doc[key]
    if not isinstance(value, kind):
        raise ConfigError(f"config key {key!r} must be {kind.__name__}")
    return value


def _resolve(base: Path, value: str) -> Path:
    path = Path(value)
    return path if path.is_absolute() else base / path


def _jsonable(value: Any) -> Any:
    """Coerce a parsed JSON value into canonical-serializer-friendly form."""
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value
