"""Tests for active-rays."""
