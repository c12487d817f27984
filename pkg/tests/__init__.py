"""Tests for seqpipe."""
