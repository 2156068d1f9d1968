"""Executable protocol families: the key-value store variants, GMW secure
computation, and the commitment lottery, with their plain-evaluation oracles."""

from . import gmw, kvs, lottery

__all__ = ["gmw", "kvs", "lottery"]
