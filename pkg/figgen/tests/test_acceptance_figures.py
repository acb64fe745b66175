"""Acceptance: regenerate all four figure analogs from real simulator output.

The simulator is driven only through its command line, exactly as an
external consumer would; figures are then rendered from the CSVs it wrote.
Artifacts are desk-scale versions of the grids used by the simulator's own
acceptance suite.
"""

import hashlib
import json
import math
import subprocess
import sys

import pytest

from figgen import FigureSpec, default_inputs, load_table, render

E2 = math.exp(-2)


def run_natsim(experiment, config, out_dir):
    config_path = out_dir.parent / f"{experiment}-config.json"
    config_path.write_text(json.dumps(config), encoding="utf-8")
    result = subprocess.run(
        [sys.executable, "-m", "natsim", experiment, "--config", str(config_path), "--out", str(out_dir)],
        capture_output=True,
        text=True,
    )
    assert result.returncode == 0, result.stderr
    return out_dir


@pytest.fixture(scope="module")
def artifacts(tmp_path_factory):
    base = tmp_path_factory.mktemp("csv")
    out = base / "artifacts"
    run_natsim(
        "bands",
        {"experiment": "bands", "grid": {"q": [-2.0, 2.0, 41], "g": [0.0, 2.0, 41]}},
        out,
    )
    run_natsim(
        "speed-sweep",
        {
            "experiment": "speed-sweep",
            "protocol": {"kind": "loop", "direction": "ccw", "h": 1.2},
            "speeds": {"log_range": [-3.0, 1.0, 6]},
            "initial": "lower",
            "workers": 2,
        },
        out,
    )
    run_natsim(
        "point-source",
        {
            "experiment": "point-source",
            "origin": [-1.0, 1.0],
            "speed": E2,
            "initial": "lower",
            "n_rays": 36,
            "max_arc": 1.2,
            "workers": 2,
        },
        out,
    )
    run_natsim(
        "phase-diagram",
        {
            "experiment": "phase-diagram",
            "xm": {"min": -1.0, "max": -0.25, "n": 6},
            "h": {"min": 0.2, "max": 1.2, "n": 6},
            "speed": E2,
            "direction": "ccw",
            "workers": 2,
        },
        out,
    )
    return out


def checksums(directory):
    return {p.name: hashlib.sha256(p.read_bytes()).hexdigest() for p in directory.glob("*.csv")}


def test_acceptance_11_figures_regenerate_from_artifacts(artifacts, tmp_path):
    before = checksums(artifacts)
    summaries = {}
    for figure_id in ("fig1-bands", "fig2-sweep", "fig3-pointsource", "fig4-phase"):
        out = tmp_path / f"{figure_id}.svg"
        spec = FigureSpec(figure_id, default_inputs(figure_id, artifacts), out)
        summaries[figure_id] = render(spec)
        assert out.exists() and out.stat().st_size > 0
    # inputs untouched
    assert checksums(artifacts) == before
    # the overlay circle radius is the prediction column, passed through
    front = load_table(artifacts / "natfront.csv", "natfront")
    assert summaries["fig3-pointsource"]["overlay_radius"] == float(front["radius_predicted"][0])
    ok = True
    print(
        "ACCEPTANCE 11 figure analogs from CSV artifacts: "
        f"{'PASS' if ok else 'FAIL'}  overlay_radius={summaries['fig3-pointsource']['overlay_radius']:.4f}"
    )


def test_phase_figure_draws_predicted_boundary(artifacts, tmp_path):
    out = tmp_path / "phase.svg"
    summary = render(FigureSpec("fig4-phase", default_inputs("fig4-phase", artifacts), out))
    boundary = load_table(artifacts / "boundary.csv", "boundary")
    finite = [h for h in boundary["h_star"] if math.isfinite(h)]
    assert summary["boundary_points"] == len(finite)
