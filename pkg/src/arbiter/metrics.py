"""Run summaries and telemetry artifacts (CSV, SVG chart, comparison table)."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from statistics import median

from .sim import RunOutcome, RunStatus, StepRecord

CSV_COLUMNS = (
    "t", "x", "y", "heading", "speed", "v_cmd", "steering_cmd", "steering_actual",
    "active", "coeff", "d_next", "sq_err", "lat_dev", "switch", "controllers",
)


class EmptyRun(ValueError):
    pass


@dataclass(frozen=True)
class RunSummary:
    strategy: str
    outcome: RunStatus
    mean_squared_speed_error: float
    peak_squared_speed_error: float
    median_squared_speed_error: float
    completion_time: float
    switch_times: tuple[float, ...]
    post_switch_peak_errors: tuple[tuple[float, float], ...]
    mean_controllers_per_tick: float


def post_switch_peaks(times, errors, switches, window: float) -> list[tuple[float, float]]:
    """Per switch, the largest error in the half-open window (t_switch, t_switch + window]."""
    peaks = []
    eps = 1e-9
    for i, is_switch in enumerate(switches):
        if not is_switch:
            continue
        t0 = times[i]
        inside = [e for t, e in zip(times[i + 1:], errors[i + 1:]) if t <= t0 + window + eps]
        peaks.append((t0, max(inside) if inside else 0.0))
    return peaks


def summarize(outcome: RunOutcome, window: float = 0.5) -> RunSummary:
    recs = outcome.records
    if not recs:
        raise EmptyRun("run has no records")
    times = [r.t for r in recs]
    errors = [r.squared_speed_error for r in recs]
    switches = [r.decision.switch_event for r in recs]
    return RunSummary(
        strategy=outcome.strategy,
        outcome=outcome.status,
        mean_squared_speed_error=sum(errors) / len(errors),
        peak_squared_speed_error=max(errors),
        median_squared_speed_error=median(errors),
        completion_time=outcome.completion_time,
        switch_times=tuple(t for t, s in zip(times, switches) if s),
        post_switch_peak_errors=tuple(post_switch_peaks(times, errors, switches, window)),
        mean_controllers_per_tick=sum(r.controllers_invoked for r in recs) / len(recs),
    )


def _g(x: float) -> str:
    # shortest repr round-trips exactly through float()
    return repr(float(x))


def record_row(r: StepRecord) -> list[str]:
    v = r.vehicle
    d = r.decision
    return [
        _g(r.t), _g(v.pose.x), _g(v.pose.y), _g(v.pose.heading), _g(v.speed),
        _g(d.command.desired_speed), _g(d.command.steering), _g(v.steering_actual),
        d.active.value, _g(d.coefficient), _g(r.distance_to_next), _g(r.squared_speed_error),
        _g(r.lateral_deviation), "1" if d.switch_event else "0", str(r.controllers_invoked),
    ]


def emit_csv(outcome: RunOutcome) -> bytes:
    if not outcome.records:
        raise EmptyRun("run has no records")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in outcome.records:
        writer.writerow(record_row(r))
    return buf.getvalue().encode("utf-8")


def parse_csv(data: bytes | str) -> list[dict]:
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
        raise ValueError(f"unexpected CSV header {reader.fieldnames}")
    rows = []
    for raw in reader:
        row = {}
        for k, val in raw.items():
            if k == "active":
                row[k] = val
            elif k in ("switch", "controllers"):
                row[k] = int(val)
            else:
                row[k] = float(val)
        rows.append(row)
    return rows


def emit_chart(outcome: RunOutcome, width: int = 900, height: int = 320) -> str:
    """Squared speed error over time as an SVG polyline, switch ticks as red dots."""
    recs = outcome.records
    if not recs:
        raise EmptyRun("run has no records")
    pad = 40
    t_max = max(recs[-1].t, 1e-9)
    e_max = max(max(r.squared_speed_error for r in recs), 1e-9)

    def xy(r: StepRecord) -> tuple[float, float]:
        x = pad + (width - 2 * pad) * r.t / t_max
        y = height - pad - (height - 2 * pad) * r.squared_speed_error / e_max
        return x, y

    points = " ".join(f"{x:.2f},{y:.2f}" for x, y in map(xy, recs))
    dots = []
    for r in recs:
        if r.decision.switch_event:
            x, y = xy(r)
            dots.append(f'<circle class="switch" cx="{x:.2f}" cy="{y:.2f}" r="3" fill="red">'
                        f"<title>{r.t:.2f}s {r.decision.active.value}</title></circle>")
    title = f"{outcome.strategy or 'run'}: {outcome.status.value}"
    return "\n".join([
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<text x="{pad}" y="20" font-family="sans-serif" font-size="14">{title}</text>',
        f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" stroke="black"/>',
        f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>',
        f'<text x="{width - pad}" y="{height - 10}" font-size="12" text-anchor="end">t [s] (max {t_max:.2f})</text>',
        f'<text x="5" y="{pad - 8}" font-size="12">sq. speed error (max {e_max:.3g})</text>',
        f'<polyline fill="none" stroke="steelblue" stroke-width="1.5" points="{points}"/>',
        *dots,
        "</svg>",
    ]) + "\n"


def emit_comparison(summaries: list[RunSummary]) -> str:
    header = f"{'strategy':<14}{'outcome':<10}{'mse':>10}{'peak':>10}{'time_s':>9}{'ctrl/tick':>11}"
    lines = [header, "-" * len(header)]
    for s in summaries:
        lines.append(
            f"{s.strategy:<14}{s.outcome.value:<10}{s.mean_squared_speed_error:>10.3f}"
            f"{s.peak_squared_speed_error:>10.3f}{s.completion_time:>9.2f}{s.mean_controllers_per_tick:>11.3f}"
        )
    return "\n".join(lines) + "\n"
