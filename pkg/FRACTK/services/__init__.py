"""Services package init."""
from . import export_service
