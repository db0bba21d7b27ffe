"""
Tests for the doubly degenerate lab
"""
