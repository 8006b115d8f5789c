import os

PROJECT_ROOT = os.path.dirname(os.path.abspath(__file__))

def _env_str(key: str, default: str) -> str:
    return os.getenv(key, default)

def _env_int(key: str, default: int) -> int:
    return int(os.getenv(key, str(default)))

def _env_float(key: str, default: float) -> float:
    return float(os.getenv(key, str(default)))

def _env_bool(key: str, default: bool) -> bool:
    default_str = "true" if default else "false"
    return os.getenv(key, default_str).lower() == "true"

# Relation inventory (16 relations + none, order-significant)
RELATION_INVENTORY_PATH = _env_str('RELATION_INVENTORY_PATH', f'{PROJECT_ROOT}/resources/relations.txt')
NONE_RELATION = 'none'
NAMED_RELATION_COUNT = 16

# Crowd aggregation (fixed point)
FIXED_POINT_TOLERANCE = _env_float('FIXED_POINT_TOLERANCE', 1e-6)
FIXED_POINT_MAX_ITERATIONS = _env_int('FIXED_POINT_MAX_ITERATIONS', 100)
SRS_RELATION_WEIGHTING = _env_str('SRS_RELATION_WEIGHTING', 'off').lower()  # off | per_choice
SRS_RELATION_WEIGHTING_MODES = ('off', 'per_choice')

# Embeddings
EMBEDDING_FORMAT = _env_str('EMBEDDING_FORMAT', 'binary').lower()  # binary | text
EMBEDDING_FORMATS = ('binary', 'text')
EMBEDDING_LOWERCASE_FALLBACK = _env_bool('EMBEDDING_LOWERCASE_FALLBACK', True)
SPAN_POLICY = _env_str('SPAN_POLICY', 'between_terms').lower()  # between_terms | whole_sentence
SPAN_POLICIES = ('between_terms', 'whole_sentence')

# Propagation
SIMILARITY_CLAMP = _env_bool('SIMILARITY_CLAMP', True)
THREADS = _env_int('THREADS', min(8, os.cpu_count() or 1))
PROPAGATION_BATCH_SIZE = _env_int('PROPAGATION_BATCH_SIZE', 1024)  # fixed so results never depend on THREADS
NEIGHBOR_SEARCH = _env_str('NEIGHBOR_SEARCH', 'blocked').lower()  # blocked | exhaustive
NEIGHBOR_SEARCH_MODES = ('blocked', 'exhaustive')
NEIGHBOR_TIE_EPSILON = _env_float('NEIGHBOR_TIE_EPSILON', 1e-12)  # cosines this close to the best count as a tie
SIMILARITY_HISTOGRAM_BINS = _env_int('SIMILARITY_HISTOGRAM_BINS', 20)

# Evaluation
GOLD_THRESHOLD = _env_float('GOLD_THRESHOLD', 0.5)
COSINE_HISTOGRAM_BINS = _env_int('COSINE_HISTOGRAM_BINS', 20)
EVAL_ORPHAN_LIMIT = _env_int('EVAL_ORPHAN_LIMIT', 10)

# Crowd corpus split
SPLIT_DEV_FRACTION = _env_float('SPLIT_DEV_FRACTION', 0.5)

# Progress counter on stderr (tqdm)
SHOW_PROGRESS = _env_bool('SHOW_PROGRESS', True)

# Logging outputs: comma-separated (stdout, stderr, file)
LOG_OUTPUTS = _env_str('LOG_OUTPUTS', 'stderr')
LOG_FILE_PATH = _env_str('LOG_FILE_PATH', f'{PROJECT_ROOT}/logs/crowdprop.log')
DEBUG_LOG_OUTPUTS = _env_str('DEBUG_LOG_OUTPUTS', 'stderr,file')
DEBUG_LOG_FILE_PATH = _env_str('DEBUG_LOG_FILE_PATH', f'{PROJECT_ROOT}/logs/crowdprop.debug.log')

# Run log (one JSON line per subcommand run)
RUN_LOGGER = _env_str('RUN_LOGGER', 'jsonl')  # jsonl | none
RUN_LOG_PATH = _env_str('RUN_LOG_PATH', f'{PROJECT_ROOT}/logs/runs.jsonl')
