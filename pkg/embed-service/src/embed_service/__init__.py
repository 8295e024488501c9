"""HTTP sidecar exposing a text encoder behind the embedding contract the
retrieval layer consumes: POST /embed and GET /health."""

from .app import create_app
from .encoder import HashedNgramEncoder

__version__ = "0.1.0"

__all__ = ["create_app", "HashedNgramEncoder"]
