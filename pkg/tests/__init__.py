"""Test suite for dsrkit."""
