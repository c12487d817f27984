"""Tests for seqpipe.pipeline."""
