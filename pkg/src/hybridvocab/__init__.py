"""Hybrid static/dynamic vocabulary selection for reduced LM heads."""
from .errors import ConfigError, DataError, EncodingError, IntegrityError, ParseError
from .evaluate import CoverageReport, coverage
from .offload import DEFAULT_HARDWARE, HardwareModel, OverlapTimeline, breakeven_rows, simulate
from .profiler import OverlapStats, ProfiledCorpus, locality_report, overlap_ratio, profile, profile_sharded
from .selector import SelectionPlan, batch_stats, format_vocab_line, remap_out, select, union_plans
from .static import (
    FilterConfig,
    StaticTaskVocab,
    build_static,
    input_aware_filter,
    language_filter,
    tolerance_filter,
)
from .subhead import HeadMatrix, MemoryReport, gather, greedy_step, logits, memory_report
from .tokenizer import MergeRule, Tokenizer, load_tokenizer
from .tokens import (
    Document,
    TokenRecord,
    TokenSet,
    VocabularyTable,
    set_difference,
    set_intersection,
    set_union,
    token_set_from_ids,
)

__version__ = "0.1.0"
