"""Tests for seqpipe.executor."""
