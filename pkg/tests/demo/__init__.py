"""Tests for seqpipe.demo."""
