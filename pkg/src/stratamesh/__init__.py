"""stratamesh: one node of a stratified-data mesh.

Raw tabular sources are cleaned and split into standardised, language,
knowledge, and graph datasets; a three-partition repository stores them;
a catalogue HTTP API publishes their metadata; peer federation lets one
node's knowledge and language layers back another node's graphs.
"""

from .errors import MeshError, ValidationError
from .model import (
    ContentKind,
    DatasetRef,
    DownloadPolicy,
    GraphDataset,
    KnowledgeDataset,
    LanguageDataset,
    MetadataRecord,
    NodeDescriptor,
    SourceDataset,
    StandardisedDataset,
    canonical_hash,
    validate,
)

__version__ = "0.1.0"

__all__ = [
    "ContentKind",
    "DatasetRef",
    "DownloadPolicy",
    "GraphDataset",
    "KnowledgeDataset",
    "LanguageDataset",
    "MeshError",
    "MetadataRecord",
    "NodeDescriptor",
    "SourceDataset",
    "StandardisedDataset",
    "ValidationError",
    "canonical_hash",
    "validate",
    "__version__",
]
