"""Layered pipeline configuration: defaults, a YAML file, then environment.

Environment overrides use the name ELG_<SECTION>_<KEY> (upper case), and the
value is parsed as YAML so numbers and booleans come through typed. Unknown
sections or keys are configuration errors rather than silent typos.
"""

from __future__ import annotations

import copy
import os
from pathlib import Path

import yaml

from .errors import ConfigError

DEFAULTS: dict[str, dict] = {
    "pipeline": {
        "output_dir": "artifacts",
        "parallelism": 1,  # stages run single-threaded; kept for forward compat
    },
    "corpus": {
        "path": "corpus.conllu",
        "format": "conllu",
        "min_tokens": 2,
        "max_tokens": 200,
    },
    "extract": {
        "min_frequency": 1,
        "blacklist": None,  # path; None means the packaged default list
        "use_blacklist": False,
    },
    "count": {
        "window_sentences": 5,
    },
    "features": {
        "epsilon": 1.0,
    },
    "embed": {
        "dim": 50,
        "window": 5,
        "epochs": 5,
        "negative_samples": 5,
        "min_count": 1,
        "learning_rate": 0.025,
        "seed": 1,
    },
    "seqrel": {
        "annotations": None,
        "folds": 5,
        "repeats": 10,
        "seed": 0,
        "classifier": "svm",
        "task": "relation",
    },
    "causality": {
        "rules": None,  # path; None means the packaged rule file
    },
    "classify": {
        "mode": "support",  # support | pmi
        "min_support": 1,
        "pmi_threshold": 0.0,
    },
    "merge": {
        "tau_merge": 0.85,
        "tau_link": 0.6,
    },
    "graph": {
        "evidence_cap": 10,
        "curated_edges": None,
    },
    "mcnc": {
        "n_candidates": 5,
        "seed": 7,
        "distractor_policy": "frequency",
        "scorers": ["random", "pmi", "bigram", "embedding", "graph"],
        "beta": 0.1,
    },
    "service": {
        "host": "127.0.0.1",
        "port": 8000,
        "node_cap": 200,
        "max_depth": 4,
        "cors_origins": [],
    },
}


def _merge_section(config: dict, section: str, values: dict, origin: str) -> None:
    if section not in config:
        raise ConfigError(f"{origin}: unknown config section {section!r}")
    for key, value in values.items():
        if key not in config[section]:
            raise ConfigError(f"{origin}: unknown key {section}.{key}")
        config[section][key] = value


def load_config(path: str | Path | None = None, env: dict | None = None) -> dict:
    """Resolve the effective configuration.

    Precedence: packaged defaults < YAML file < ELG_* environment variables.
    """
    config = copy.deepcopy(DEFAULTS)
    if path is not None:
        path = Path(path)
        try:
            raw = yaml.safe_load(path.read_text(encoding="utf-8"))
        except FileNotFoundError as exc:
            raise ConfigError(f"config file {path} not found") from exc
        except yaml.YAMLError as exc:
            raise ConfigError(f"config file {path}: {exc}") from exc
        if raw is None:
            raw = {}
        if not isinstance(raw, dict):
            raise ConfigError(f"config file {path}: top level must be a mapping")
        for section, values in raw.items():
            if not isinstance(values, dict):
                raise ConfigError(f"config file {path}: section {section!r} must be a mapping")
            _merge_section(config, str(section), values, str(path))

    env = os.environ if env is None else env
    for name, raw_value in sorted(env.items()):
        if not name.startswith("ELG_"):
            continue
        rest = name[len("ELG_"):]
        matched = False
        for section in DEFAULTS:
            prefix = section.upper() + "_"
            if rest.startswith(prefix):
                key = rest[len(prefix):].lower()
                try:
                    value = yaml.safe_load(raw_value)
                except yaml.YAMLError as exc:
                    raise ConfigError(f"{name}: unparseable value {raw_value!r}") from exc
                _merge_section(config, section, {key: value}, name)
                matched = True
                break
        if not matched:
            raise ConfigError(f"{name}: no config section matches")
    return config
