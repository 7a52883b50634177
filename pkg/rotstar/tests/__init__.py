"""Unit tests for rotstar."""
