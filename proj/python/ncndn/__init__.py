"""Network-coded NDN video streaming: rate allocation, coding and simulation."""

from ._core import (
    Allocation,
    CodedPacket,
    ConfigInvalid,
    CycleError,
    Decoder,
    ExperimentConfig,
    Generation,
    Graph,
    Infeasible,
    Link,
    MultiServerError,
    ParseError,
    Plan,
    Rng,
    Role,
    VideoProfile,
    bloom_carriers,
    encode,
    gf_div,
    gf_inv,
    gf_mul,
    load_config,
    make_generation,
    optimize,
    oracle_solve,
    parse_topology,
    parse_topology_text,
    recode,
    simulate,
    upper_bound_psnr,
    validate_config,
    validate_costs,
)

__version__ = "0.1.0"
