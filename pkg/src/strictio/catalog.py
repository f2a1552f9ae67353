"""Built-in curves and hypersurfaces addressable by name.

``paper_example`` is the frontal f = gamma + sX + rY with
X = (0, cos t, sin t, sin t + t), Y = (1, 0, 0, 0) and
gamma' = (1 - 4t^3) X.  The antiderivatives are fixed by gamma(0) = 0.
"""

from __future__ import annotations

from .curve import CurveModel

PAPER_EXAMPLE = {
    "gamma": [
        "0",
        "sin(t) - 4*t^3*sin(t) - 12*t^2*cos(t) + 24*t*sin(t) + 24*cos(t) - 24",
        "1 - cos(t) + 4*t^3*cos(t) - 12*t^2*sin(t) - 24*t*cos(t) + 24*sin(t)",
        "1 - cos(t) + t^2/2 + 4*t^3*cos(t) - 12*t^2*sin(t) - 24*t*cos(t) + 24*sin(t) - 4*t^5/5",
    ],
    "X": ["0", "cos(t)", "sin(t)", "sin(t) + t"],
    "Y": ["1", "0", "0", "0"],
    "domain": (-1.0, 1.0),
}

CURVES = {
    "helix4": (["cos(t)", "sin(t)", "cos(2*t)", "sin(2*t)"], (-3.0, 3.0)),
    "moment_curve": (["t", "t^2", "t^3", "t^4"], (0.1, 1.0)),
    "paper_example": (PAPER_EXAMPLE["gamma"], PAPER_EXAMPLE["domain"]),
}


def curve(name: str) -> CurveModel:
    try:
        comps, domain = CURVES[name]
    except KeyError:
        raise KeyError(f"unknown catalog curve {name!r}; known: {sorted(CURVES)}") from None
    return CurveModel(comps, domain, name=name)


def paper_example():
    """(gamma, X, Y, domain) of the worked frontal example."""
    d = PAPER_EXAMPLE
    return (
        CurveModel(d["gamma"], d["domain"], name="paper_example.gamma"),
        CurveModel(d["X"], d["domain"], name="paper_example.X"),
        CurveModel(d["Y"], d["domain"], name="paper_example.Y"),
        d["domain"],
    )


def paper_example_normal(t):
    """Closed-form normal direction of the example (not normalized)."""
    import numpy as np

    t = np.asarray(t, dtype=float)
    return np.stack(
        [np.zeros_like(t), t * np.cos(t) - np.sin(t), 1 + np.cos(t) + t * np.sin(t), -np.ones_like(t)], -1
    )
