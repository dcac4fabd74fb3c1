"""Tests for noisyhk package."""
