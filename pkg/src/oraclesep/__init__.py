"""Exact desk-scale laboratory for collision- and cloning-oracle separations."""

from .qstate import (
    BOT,
    BotExtendedState,
    FiniteDistribution,
    born_distribution,
    dist_state,
    euclidean_distance,
    measure,
    min_phase_distance,
    sample_noncollapsing,
    statistical_distance,
    trace_distance_pure,
)
from .circuits import (
    GateOp,
    OracleAidedCircuit,
    canonical_decode,
    canonical_encode,
    conjugate_circuit,
    parse_circuit,
    simulate,
    simulate_traced,
)
from .oracles import (
    LazyOracle,
    OracleBundleS,
    PuncturedOracle,
    TableOracle,
    find,
    puncture,
    sample_bundle,
)
from .compressed import (
    CompressedDatabase,
    ProductDistribution,
    compression_apply,
    enumerate_oracles,
    oracle_from_distribution,
    run_adversary_csto,
)
from .cloners import (
    ColState,
    MarkovTranscript,
    col_sample,
    col_state,
    dcol_distribution,
    dq_distribution,
    q_sample,
    qcol_apply,
)

__version__ = "0.1.0"
