"""County death-ratio change around state mask orders, and nine classifiers to predict it."""

__version__ = "0.1.0"

from .errors import ConfigError, DataError, MaskRatioError  # noqa: E402

__all__ = ["ConfigError", "DataError", "MaskRatioError", "__version__"]
