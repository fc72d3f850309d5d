"""Finite-sample CHSH experiments as concrete, replayable computations.

Subpackage map:

* core       sign tables, settings streams, the observed CHSH statistic
* bounds     closed-form tail bounds and detector-efficiency limits
* quantum    singlet statistics and the ideal-experiment simulator
* lhv        table-backed local models and the detection-loophole cheater
* events     timestamped detections, pairing schemes, loophole verdicts
* polytope   behavior space: validity, facets, classification
* qrc        the randomness-challenge referee and its wire protocols
* cli        command-line front end over all of the above
"""

from .bounds import (
    BoundReport,
    EfficiencyBound,
    canonical_delta,
    hoeffding_tail,
    larsson_coincidence_bound,
    larsson_detection_bound,
    min_runs_for,
    theorem1_bound,
    tsirelson_limit,
    two_term_bound,
    two_term_bound_optimized,
)
from .core import (
    ChshSummary,
    CounterfactualRow,
    CounterfactualTable,
    ObservedRun,
    RunSet,
    SettingsStream,
    conjecture1_estimate,
    full_table_chsh,
    observe,
    observed_correlations,
    row_chsh_term,
    sample_settings,
)
from .events import (
    AnalysisReport,
    EventStream,
    PairingResult,
    TimedEvent,
    analyze,
    estimate_gamma,
    pair_by_lattice,
    pair_by_window,
    parse_event_stream,
    stream_from_runs,
    write_event_stream,
)
from .lhv import (
    CheaterConfig,
    DeterministicStrategy,
    LhvModel,
    TernaryRuns,
    cheater_run,
    enumerate_deterministic,
    generate_table,
    simulate_loophole_experiment,
)
from .polytope import (
    Behavior,
    BehaviorClass,
    chsh_facets,
    classify,
    is_local_mixture,
    local_vertices,
    mixture,
    mixture_weights,
    pr_box,
    quantum_behavior,
    validate,
)
from .qrc import (
    ChallengeConfig,
    ChallengerFailure,
    CommandChallenger,
    HonestLhvChallenger,
    ProtocolViolation,
    QuantumPseudoChallenger,
    SessionTranscript,
    Verdict,
    consistency_probe,
    run_interactive_session,
    run_spreadsheet_session,
    run_three_node_challenge,
    run_verdict,
    verify_determinism,
)
from .quantum import (
    AngleSet,
    JointTable,
    canonical_angles,
    joint_outcome_table,
    sample_run,
    simulate_experiment,
    singlet_correlation,
)
from .rng import Rng, derive_seed

__version__ = "0.1.0"
