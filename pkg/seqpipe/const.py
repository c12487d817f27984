"""Constants for seqpipe."""

from logging import Logger, getLogger

LOGGER: Logger = getLogger(__package__)

# Environment variables
ENV_RUN_ROOT = "SEQPIPE_RUN_ROOT"

# Log output (same format as the test configuration)
LOG_FORMAT = "%(asctime)s.%(msecs)03d %(levelname)-8s %(name)s: %(message)s"
LOG_DATE_FORMAT = "%Y-%m-%d %H:%M:%S"

# Pipeline config keys
CONF_NAME = "name"
CONF_STAGES = "stages"
CONF_WORKDIR_ROOT = "workdir_root"
CONF_ID = "id"
CONF_MODE = "mode"
CONF_COMMAND = "command"
CONF_OUTPUTS = "outputs"
CONF_CORES = "cores"
CONF_BASE_TIME_S = "base_time_s"
CONF_LOGS = "logs"
CONF_INPUT = "input"  # Earlier stage id or INPUT_DATASET
CONF_GATHER = "gather"  # Scatter stages only
CONF_FORMAT = "format"  # Partition file format

# Stage modes
MODE_SINGLE = "single"
MODE_SCATTER = "scatter"

# Gather modes for scatter stages
GATHER_RECORDS = "records"  # Sequence files, merged with merge_parts
GATHER_ROWS = "rows"  # Tab-separated files, rows concatenated and sorted
GATHER_ANNOTATIONS = "annotations"  # Predictions + evidence tables, merged annotation records

# Reference to the initial dataset in a stage's input
INPUT_DATASET = "dataset"

# Command template placeholders
PLACEHOLDER_INPUT = "input"
PLACEHOLDER_OUTPUT = "output"
PLACEHOLDER_PART = "part"
PLACEHOLDER_WORKDIR = "workdir"
KNOWN_PLACEHOLDERS = frozenset({PLACEHOLDER_INPUT, PLACEHOLDER_OUTPUT, PLACEHOLDER_PART, PLACEHOLDER_WORKDIR})

# Sequence formats
FORMAT_FASTA = "fasta"
FORMAT_FASTQ = "fastq"
FASTA_SUFFIXES = frozenset({".fa", ".fasta", ".fna", ".ffn", ".faa"})
FASTQ_SUFFIXES = frozenset({".fq", ".fastq"})
PHRED_OFFSET = 33
PHRED_MAX = 93

# Length cutoffs defining the dataset sizes of the scalability study (nucleotides)
DATASET_SIZE_CUTOFFS = {
    "small": 400,
    "medium": 300,
    "large": 250,
}

# Quality filter rejection reasons, in evaluation order
REJECT_LENGTH = "length"
REJECT_N_FRACTION = "n_fraction"
REJECT_MEAN_QUALITY = "mean_quality"

# Taxonomy
UNCLASSIFIED = "UNCLASSIFIED"
DEFAULT_MIN_HITS = 1

# Annotation exports
ANNOTATION_TSV_COLUMNS = (
    "gene_id",
    "contig_id",
    "start",
    "end",
    "strand",
    "n_evidence",
    "best_tool",
    "best_subject",
    "best_evalue",
    "descriptions",
)
UNKNOWN_COMMON_NAME = "unknown"
ANNOTATIONS_TSV_NAME = "annotations.tsv"
ANNOTATIONS_JSONL_NAME = "annotations.jsonl"

# Default configuration values
DEFAULT_CORES = 1
DEFAULT_BASE_TIME_S = 1.0
DEFAULT_RUN_ROOT = "seqpipe-runs"
DEFAULT_POLL_INTERVAL_S = 0.2
DEFAULT_WAIT_TIMEOUT_S = 3600.0
DEFAULT_TASKS_PER_CORE = 1
DEFAULT_ERROR_PATTERNS = ("ERROR", "FATAL", "Segmentation fault")

# Run directory layout
EVENTS_FILE_NAME = "events.jsonl"
METRICS_FILE_NAME = "metrics.json"
PARTS_DIR_NAME = "parts"
STDOUT_LOG_NAME = "stdout.log"
STDERR_LOG_NAME = "stderr.log"
PARTITION_INPUT_STEM = "input"
INPUTS_DIR_NAME = "inputs"
SINGLE_TASK_DIR_NAME = "single"
PART_DIR_PREFIX = "part_"
RUN_LOG_NAME = "run.log"
RUN_PID_NAME = "run.pid"

# Ledger event kinds
EVENT_RUN_STARTED = "run_started"
EVENT_TASK_TRANSITION = "task_transition"
EVENT_STAGE_FINISHED = "stage_finished"
EVENT_RUN_FINISHED = "run_finished"

# Run outcomes
RUN_STATUS_SUCCEEDED = "succeeded"
RUN_STATUS_FAILED = "failed"
RUN_STATUS_RUNNING = "running"  # No run_finished event yet

# Error classification for backend poll errors
ERROR_TYPE_TEMPORARY = "temporary"  # Retry on next poll
ERROR_TYPE_PERMANENT = "permanent"  # Fail the job's remaining tasks
ERROR_TYPE_UNKNOWN = "unknown"  # Default, treat as temporary
MAX_CONSECUTIVE_POLL_ERRORS = 3

# Simulator
SIM_DEFAULT_SEED = 0
SIM_DEFAULT_JITTER = 0.0
SIM_DEFAULT_USER = "default"
SIM_BACKEND_NAME = "sim"
LOCAL_BACKEND_NAME = "local"
TRACE_FILE_NAME = "trace.jsonl"
SUMMARY_FILE_NAME = "summary.tsv"
SCENARIO_SUFFIXES = frozenset({".yaml", ".yml", ".cfg"})

# Scenario config keys (plus CONF_ID, CONF_NAME, CONF_CORES, CONF_BASE_TIME_S)
CONF_SEED = "seed"
CONF_JITTER = "jitter"
CONF_NODES = "nodes"
CONF_JOBS = "jobs"
CONF_SLOWDOWN = "slowdown"
CONF_COUNT = "count"  # Replicate a node entry
CONF_USER = "user"
CONF_TASKS = "tasks"
CONF_ARRIVAL = "arrival"
CONF_LABEL = "label"

# Report files
REPORT_TEXT_NAME = "report.txt"
REPORT_JSON_NAME = "report.json"
BREAKDOWN_TSV_NAME = "breakdown.tsv"
PERCENT_TOLERANCE = 0.01

# CLI exit codes
EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2
