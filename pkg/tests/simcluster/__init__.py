"""Tests for seqpipe.simcluster."""
