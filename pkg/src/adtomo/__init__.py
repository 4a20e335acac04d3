"""adtomo: a deterministic behavioral-advertising ecosystem simulator and the
tomography pipeline that infers tracker-advertiser data-sharing relationships
from the text of delivered ad creatives."""

__version__ = "0.1.0"

from .errors import ConfigError

__all__ = ["ConfigError", "__version__"]
