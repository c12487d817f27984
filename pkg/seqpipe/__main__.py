"""Run seqpipe as ``python -m seqpipe``."""

from seqpipe.cli import main

if __name__ == "__main__":
    main()
