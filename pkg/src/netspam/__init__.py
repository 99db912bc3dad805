"""Metapath-based review spam detection."""
