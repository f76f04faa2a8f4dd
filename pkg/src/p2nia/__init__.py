"""Privacy-preserving non-iterative fairness audits.

The platform releases its model-labeled audit data under epsilon-differential
privacy (GRR or marginal synthesis); the auditor computes debiased
group-fairness metrics from that single release.
"""

from .data import AttributeSpec, BinningRule, Dataset, Schema, discretize, ingest_csv, split, write_csv
from .errors import DataError, MechanismError, P2niaError, ProtocolError, UndefinedMetricError
from .mechanisms import (BudgetLedger, GrrChannel, grr_debias_counts, grr_flip_prob, grr_perturb,
                         measure_marginal, project_nonnegative)
from .metrics import (FairnessReport, JointCounts, demographic_parity, equality_of_opportunity, equalized_odds,
                      fairness_report, joint_counts, tv_distance)
from .model import NaiveBayesModel, predict, train
from .protocol import (AuditRelease, AuditRequest, BlackBoxConfig, auditor_evaluate, blackbox_audit,
                       platform_respond, reference_report, run_session)

__version__ = "0.1.0"
