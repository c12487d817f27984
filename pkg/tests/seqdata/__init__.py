"""Tests for seqpipe.seqdata."""
