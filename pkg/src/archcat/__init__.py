"""archcat: consistency checking for compositional architecture frameworks."""

__version__ = "0.1.0"

from archcat.dsl import ParseResult, format, parse, parse_file  # noqa: E402
from archcat.model import (  # noqa: E402
    Cluster,
    Diagnostic,
    Element,
    Framework,
    Group,
    Level,
    ModelError,
    Morphism,
    ProductDecl,
    Refinement,
    SourceSpan,
    UnknownReference,
    View,
    cluster_chain,
    identity_morphism,
    views_at,
)
from archcat.rules import CheckConfig, CheckReport, check_all  # noqa: E402

__all__ = [
    "CheckConfig",
    "CheckReport",
    "Cluster",
    "Diagnostic",
    "Element",
    "Framework",
    "Group",
    "Level",
    "ModelError",
    "Morphism",
    "ParseResult",
    "ProductDecl",
    "Refinement",
    "SourceSpan",
    "UnknownReference",
    "View",
    "check_all",
    "cluster_chain",
    "format",
    "identity_morphism",
    "parse",
    "parse_file",
    "views_at",
]
