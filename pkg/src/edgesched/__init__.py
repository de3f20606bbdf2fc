"""edgesched: deterministic edge-cloud scheduling simulator and companions.

Public surface, by responsibility:

* core        - value types, normalization, scenario config I/O
* scheduler   - placement policies and the score pipeline
* sim         - the discrete-event engine
* metrics     - aggregation and CSV/JSON export
* visualprep  - box expansion, cropping, HSV jitter, PPM I/O
* lora        - low-rank adapter matrix algebra
* cli         - the ``edgesched`` command
"""

from .core import (
    ConfigError,
    MetricBounds,
    NodeDescriptor,
    PolicyName,
    RawNodeSample,
    ResourceStateVector,
    Scenario,
    ScenarioConfig,
    SchedulingWeights,
    load_scenario,
    load_scenario_file,
    make_heterogeneous_nodes,
    mix_seed,
    normalize_sample,
    serialize_scenario,
)
from .metrics import SimulationResult, aggregate
from .scheduler import AssignmentDecision, PolicyState, make_policy_state
from .sim import SimTrace, Task, make_default_config, run_simulation, trace_digest

__version__ = "0.1.0"

__all__ = [
    "AssignmentDecision",
    "ConfigError",
    "MetricBounds",
    "NodeDescriptor",
    "PolicyName",
    "PolicyState",
    "RawNodeSample",
    "ResourceStateVector",
    "Scenario",
    "ScenarioConfig",
    "SchedulingWeights",
    "SimTrace",
    "SimulationResult",
    "Task",
    "aggregate",
    "load_scenario",
    "load_scenario_file",
    "make_default_config",
    "make_heterogeneous_nodes",
    "make_policy_state",
    "mix_seed",
    "normalize_sample",
    "run_simulation",
    "serialize_scenario",
    "trace_digest",
    "__version__",
]
