from .app import app, build_ambiguity_set

__all__ = ["app", "build_ambiguity_set"]
