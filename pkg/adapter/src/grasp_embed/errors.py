"""Error taxonomy for the embedding adapter.

Input and configuration problems map to CLI exit code 2, anything else
to 3. Per-page problems never raise; they degrade to zero rows with a
logged warning so one bad page cannot abort a site run.
"""


class AdapterError(Exception):
    """Base class for adapter failures."""


class ConfigError(AdapterError):
    """A configuration value violates its invariant."""


class ManifestError(AdapterError):
    """The corpus manifest is missing or malformed."""


class ModelLoadError(AdapterError):
    """A pretrained encoder could not be loaded at startup."""
