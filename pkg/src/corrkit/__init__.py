"""Learning coordinated corrections from demonstration variability.

The toolkit aligns kinesthetic demonstrations, segments them by contact,
learns forward/backward movement primitives plus a per-sample schedule of
principal coordination directions, and executes the result under shared
control: a low-DOF operator input is mapped through the current coordination
frame into a full-state correction added to the nominal behavior.
"""

from .bundle import BehaviorBundle, LearnedSegment, load_bundle, save_bundle
from .channels import (
    ChannelKind,
    ChannelSchema,
    contact_schema,
    free_space_schema,
    raw_capture_schema,
)
from .corrections import CorrectionFrame, CorrectionSchedule, choose_k, extract
from .demolog import Demo, DemoSet, load_demo_set, save_demo_set
from .dmp import DmpParams, DmpState, LearnedDmp
from .executor import ExecutorConfig, Session, TelemetryFrame, run_headless
from .learn import LearnConfig, learn_bundle
from .override import OverrideConfig, OverrideState
from .simenv import Scenario, make_field, shipped_scenario
from .surface import SurfaceModel, cylinder_patch, flat_plane
from .synth import dual_structure_task, generate, single_coordination_task

__version__ = "0.1.0"

__all__ = [
    "BehaviorBundle",
    "ChannelKind",
    "ChannelSchema",
    "CorrectionFrame",
    "CorrectionSchedule",
    "Demo",
    "DemoSet",
    "DmpParams",
    "DmpState",
    "ExecutorConfig",
    "LearnConfig",
    "LearnedDmp",
    "LearnedSegment",
    "OverrideConfig",
    "OverrideState",
    "Scenario",
    "Session",
    "SurfaceModel",
    "TelemetryFrame",
    "choose_k",
    "contact_schema",
    "cylinder_patch",
    "dual_structure_task",
    "extract",
    "flat_plane",
    "free_space_schema",
    "generate",
    "learn_bundle",
    "load_bundle",
    "load_demo_set",
    "make_field",
    "raw_capture_schema",
    "run_headless",
    "save_bundle",
    "save_demo_set",
    "shipped_scenario",
    "single_coordination_task",
    "__version__",
]
