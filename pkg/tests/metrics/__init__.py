"""Tests for seqpipe.metrics."""
