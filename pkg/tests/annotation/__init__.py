"""Tests for seqpipe.annotation."""
