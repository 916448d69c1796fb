"""Exception hierarchy shared across the toolkit.

Exit-code mapping in the CLI: usage errors are handled by click (1),
DataError and ConfigError map to 2, everything else to 3.
"""


class ElgError(Exception):
    """Base class for all toolkit errors."""


class DataError(ElgError):
    """Input data is unusable: empty corpus, unknown event, bad artifact."""


class EmptyCorpusError(DataError):
    """A corpus source yielded zero valid sentences."""


class ConfigError(ElgError):
    """A configuration resource (config file, rule file, blacklist) is invalid."""


class MissingArtifactError(DataError):
    """A pipeline stage's required input artifact does not exist."""

    def __init__(self, artifact: str, stage: str):
        self.artifact = artifact
        self.stage = stage
        super().__init__(
            f"missing artifact {artifact!r}; run the {stage!r} stage first"
        )


class GraphFormatError(DataError):
    """A persisted graph file is corrupt or has an unsupported version."""


class TrainingDivergedError(ElgError):
    """A classifier's training loss became non-finite."""
