"""Tests for seqpipe.taxonomy."""
