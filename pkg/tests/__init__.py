"""Tests for bilinpdo."""
