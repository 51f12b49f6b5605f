"""Causal effects of research decisions on citations, estimated from twin papers.

Twin papers are pairs that cite each other. They tend to be parallel work on
the same topic from nearby communities, so the citation gap between a treated
and an untreated twin estimates the effect of the treatment.
"""

from .estimator import (AteResult, PairDataset, additivity_report, build_pair_dataset,
                        estimate_ate, estimate_ite, naive_observational_ate, venue_ate_table)
from .ingest import (AuthorRef, Corpus, PaperRecord, normalize_author, normalize_venue,
                     parse_corpus)
from .outcomes import OutcomeTable, compute_outcomes
from .treatments import INAPPLICABLE, Assignment, TreatmentSpec, assign_pair, parse_treatment
from .twin_graph import (UNREACHABLE, TwinPair, TwinSet, build_collab_network, detect_twins,
                         filter_twins, paper_collab_distance)

__version__ = "0.1.0"
