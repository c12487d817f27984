"""
seqpipe: scatter-gather pipelines for metagenomic sequence analysis.

Pipelines are linear chains of stages run on a local process pool or on a
simulated batch cluster. The cluster simulator, the execution time breakdown
and the speedup report reproduce the scalability experiments a pipeline like
this is judged by.
"""

__version__ = "0.1.0"
