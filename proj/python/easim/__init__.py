"""Trace-driven streaming simulator with client-side recovery and upscaling.

The heavy lifting lives in the compiled ``_easim`` module; this wrapper keeps
the Python surface small and dict-shaped.
"""

import json as _json

from ._easim import (
    EasimError,
    default_quality_json,
    default_scheme_names,
    fec_decode,
    fec_encode,
    frame_loss_probability,
    min_redundancy_for_target,
    parity_for_ratio,
    run_session_json,
    session_qoe,
    synthesize_trace,
)

__version__ = "0.1.0"

__all__ = [
    "EasimError",
    "default_quality_json",
    "default_scheme_names",
    "fec_decode",
    "fec_encode",
    "frame_loss_probability",
    "min_redundancy_for_target",
    "parity_for_ratio",
    "run_session",
    "run_session_json",
    "session_qoe",
    "synthesize_trace",
]


def run_session(trace, **kwargs):
    """Simulate one playback session and return the report as a dict.

    ``trace`` is a dict like the one :func:`synthesize_trace` returns:
    ``id``, ``kind``, and parallel ``timestamps`` / ``throughput_kbps`` /
    ``loss_rate`` lists. Keyword arguments pass through to the simulator
    (``scheme``, ``seed``, ``max_chunks``, ``loss_override``,
    ``fec_plan_json``, ``record_frames``, ``record_decisions``,
    ``lookahead_chunks``).
    """
    text = run_session_json(
        trace["id"],
        trace["kind"],
        trace["timestamps"],
        trace["throughput_kbps"],
        trace["loss_rate"],
        **kwargs,
    )
    return _json.loads(text)
