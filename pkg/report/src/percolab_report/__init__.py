"""percolab-report: static figures and tables from percolab result manifests."""

from .cli import render
from .figures import FIGURE_KINDS
from .reader import IntegrityError, Manifest, SchemaError

__version__ = "0.1.0"
