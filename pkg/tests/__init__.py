"""Tests for gkz_integrality package."""
