"""Tests for anharmonic-cli."""
