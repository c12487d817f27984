"""Tests for seqpipe.cli."""
