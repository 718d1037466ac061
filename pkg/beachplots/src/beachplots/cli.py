"""Command-line entry points, one per figure kind.

Each script takes --input (plus --summary / --manifest where the figure
needs them) and --output, renders the figure, and writes both a PNG and
an SVG next to the requested output path. Bad inputs fail loudly: a
missing file or a file that does not match its documented schema exits
with status 2 and a message naming the problem.
"""

import argparse
import sys

from .errors import SchemaMismatch
from .figures import FigureSpec, render


def _run(spec: FigureSpec) -> int:
    try:
        (png, svg), info = render(spec)
    except (SchemaMismatch, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {png}")
    print(f"wrote {svg}")
    return 0


def main_decay(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="beachplots-decay",
        description="Plot an energy history with its fitted decay rate "
        "and certificate bound.",
    )
    parser.add_argument("--input", required=True,
                        help="timeseries CSV from a simulation run")
    parser.add_argument("--summary", default=None,
                        help="summary JSON of the same run; enables the "
                        "fit overlay and the bound line")
    parser.add_argument("--output", required=True,
                        help="output image path; .png and .svg siblings "
                        "are both written")
    args = parser.parse_args(argv)
    inputs = (args.input,) if args.summary is None \
        else (args.input, args.summary)
    return _run(FigureSpec("decay_curve", inputs, args.output))


def main_snapshot(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="beachplots-snapshot",
        description="Plot a surface snapshot with the damping zone shaded "
        "and the applied pressure on a twin axis.",
    )
    parser.add_argument("--input", required=True, help="snapshot CSV")
    parser.add_argument("--summary", required=True,
                        help="summary JSON of the run that wrote the "
                        "snapshot")
    parser.add_argument("--manifest", required=True,
                        help="manifest JSON of the run, read for the tank "
                        "geometry and damping zone")
    parser.add_argument("--output", required=True)
    args = parser.parse_args(argv)
    spec = FigureSpec(
        "snapshot", (args.input, args.summary, args.manifest), args.output
    )
    return _run(spec)


def main_residuals(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="beachplots-residuals",
        description="Plot identity residuals against grid refinement on "
        "log-log axes.",
    )
    parser.add_argument("--input", required=True,
                        help="convergence CSV from a refinement sweep")
    parser.add_argument("--output", required=True)
    args = parser.parse_args(argv)
    return _run(
        FigureSpec("residual_vs_resolution", (args.input,), args.output)
    )


def main_circle(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="beachplots-circle",
        description="Plot the norm trajectories of a circle-model run.",
    )
    parser.add_argument("--input", required=True,
                        help="norms CSV from a circle run")
    parser.add_argument("--output", required=True)
    args = parser.parse_args(argv)
    return _run(FigureSpec("circle_norms", (args.input,), args.output))
