"""Ground-truth simulators, rasterizer, variable extractor, and baselines."""

from .specs import (InitDistribution, PhysicalVariables, RenderGeometry,
                    SystemSpec, SYSTEM_NAMES, load_spec, preset,
                    sample_initial_state, save_spec, wrap_angle)
from .dynamics import (DynamicsError, derivatives, observe_step,
                       observe_trajectory, simulate, state_energy,
                       step_dynamics)
from .render import RenderRejected, render, render_pair, scene_primitives
from .extract import (ExtractionResult, FrameReading, extract_physical,
                      object_masks, read_frame)
from .baselines import (BASELINE_KINDS, baseline_predict,
                        baseline_predict_pixels, total_energy, wrap_deg)

__all__ = [
    "InitDistribution", "PhysicalVariables", "RenderGeometry", "SystemSpec",
    "SYSTEM_NAMES", "load_spec", "preset", "sample_initial_state", "save_spec",
    "wrap_angle", "DynamicsError", "derivatives", "observe_step",
    "observe_trajectory", "simulate", "state_energy", "step_dynamics",
    "RenderRejected", "render", "render_pair", "scene_primitives",
    "ExtractionResult", "FrameReading", "extract_physical", "object_masks",
    "read_frame", "BASELINE_KINDS", "baseline_predict",
    "baseline_predict_pixels", "total_energy", "wrap_deg",
]
