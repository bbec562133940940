"""Policy heatmap: P(Allow) over the failure/time grid, as CSV and SVG.

The grid fixes the task context (task index, AI-use history, questions
completed so far) and sweeps s_fa over 0..5 and s_t over 0,5,...,300.
The aggregated failure counter is filled by the documented convention
s_cu = s_fa + 2*(questions completed in the task): on average two failed
attempts are assumed per already-cleared question.
"""

from __future__ import annotations

import csv

import numpy as np

from ..agents.common import softmax
from ..approx import load_checkpoint
from ..domain import FeatureCaps, GateObservation, featurize
from ..errors import ValidationError

S_FA_VALUES = tuple(range(6))
S_T_VALUES = tuple(range(0, 301, 5))


def heatmap_grid(
    net,
    task_index: int,
    history,
    caps: FeatureCaps = FeatureCaps(),
    questions_completed: int = 0,
) -> np.ndarray:
    """(6, 61) array of P(Allow) from the policy head."""
    history = tuple(bool(h) for h in history)
    if task_index not in (0, 1, 2):
        raise ValidationError("task index in {0,1,2}")
    if len(history) != task_index:
        raise ValidationError(
            f"history length {len(history)} must equal task index {task_index}"
        )
    if questions_completed not in (0, 1, 2):
        raise ValidationError("questions_completed in {0,1,2}")
    if "policy" not in net.head_dims or net.head_dims["policy"] != 2:
        raise ValidationError("checkpoint lacks a 2-way policy head")
    feats = np.zeros((len(S_FA_VALUES) * len(S_T_VALUES), 10))
    k = 0
    for fa in S_FA_VALUES:
        for t in S_T_VALUES:
            obs = GateObservation(
                failed_attempts_current_question=fa,
                time_on_task=float(t),
                ai_used_history=history,
                failed_attempts_current_task=fa + 2 * questions_completed,
                task_index=task_index,
                question_index=questions_completed,
                ai_currently_granted=False,
            )
            feats[k] = featurize(obs, caps)
            k += 1
    logits = net.forward_batch(feats)[0]["policy"]
    p_allow = softmax(logits)[:, 1]
    return p_allow.reshape(len(S_FA_VALUES), len(S_T_VALUES))


def shaping_contrast(grid: np.ndarray) -> float:
    """Mean P(Allow) over {s_fa>=3, s_t>60} minus over {s_fa=0, s_t<60}."""
    t = np.array(S_T_VALUES)
    late = grid[3:, t > 60]
    early = grid[0:1, t < 60]
    return float(late.mean() - early.mean())


def write_heatmap_csv(grid: np.ndarray, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["s_fa\\s_t", *S_T_VALUES])
        for i, fa in enumerate(S_FA_VALUES):
            writer.writerow([fa, *(f"{v:.6f}" for v in grid[i])])


def read_heatmap_csv(path) -> np.ndarray:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    header = rows[0]
    if header[0] != "s_fa\\s_t" or [int(c) for c in header[1:]] != list(S_T_VALUES):
        raise ValidationError("not a heatmap CSV (unexpected header)")
    grid = np.array([[float(v) for v in row[1:]] for row in rows[1:]])
    if grid.shape != (len(S_FA_VALUES), len(S_T_VALUES)):
        raise ValidationError("heatmap CSV grid has the wrong shape")
    return grid


def _cell_color(v: float) -> str:
    """Two-segment blue-white-red ramp over [0, 1]."""
    v = min(max(float(v), 0.0), 1.0)
    blue, white, red = (59, 76, 192), (242, 242, 242), (180, 4, 38)
    if v < 0.5:
        a, b, f = blue, white, v / 0.5
    else:
        a, b, f = white, red, (v - 0.5) / 0.5
    rgb = [round(x + (y - x) * f) for x, y in zip(a, b)]
    return f"rgb({rgb[0]},{rgb[1]},{rgb[2]})"


def render_heatmap_svg(grid: np.ndarray, title: str = "P(Allow)") -> str:
    """Self-contained SVG: colored grid, axis labels, value legend."""
    cell_w, cell_h = 13, 36
    left, top, right, bottom = 70, 40, 90, 60
    n_rows, n_cols = grid.shape
    width = left + n_cols * cell_w + right
    height = top + n_rows * cell_h + bottom
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{left}" y="20" font-size="14">{title}</text>',
    ]
    for i in range(n_rows):
        for j in range(n_cols):
            x = left + j * cell_w
            y = top + i * cell_h
            parts.append(
                f'<rect x="{x}" y="{y}" width="{cell_w}" height="{cell_h}" '
                f'fill="{_cell_color(grid[i, j])}"/>'
            )
    # y axis: failed attempts
    for i, fa in enumerate(S_FA_VALUES):
        y = top + i * cell_h + cell_h / 2 + 4
        parts.append(f'<text x="{left - 14}" y="{y}" text-anchor="end">{fa}</text>')
    parts.append(
        f'<text x="16" y="{top + n_rows * cell_h / 2}" text-anchor="middle" '
        f'transform="rotate(-90 16 {top + n_rows * cell_h / 2})">failed attempts (s_fa)</text>'
    )
    # x axis: time on task, a tick every 30 s
    for j, t in enumerate(S_T_VALUES):
        if t % 30 == 0:
            x = left + j * cell_w + cell_w / 2
            parts.append(
                f'<text x="{x}" y="{top + n_rows * cell_h + 16}" '
                f'text-anchor="middle">{t}</text>'
            )
    parts.append(
        f'<text x="{left + n_cols * cell_w / 2}" y="{height - 16}" '
        f'text-anchor="middle">time on task s_t (seconds)</text>'
    )
    # legend: vertical gradient bar
    lx = left + n_cols * cell_w + 24
    lh = n_rows * cell_h
    steps = 24
    for s in range(steps):
        v = 1.0 - (s + 0.5) / steps
        y = top + s * lh / steps
        parts.append(
            f'<rect x="{lx}" y="{y:.1f}" width="16" height="{lh / steps + 0.5:.1f}" '
            f'fill="{_cell_color(v)}"/>'
        )
    for v in (0.0, 0.5, 1.0):
        y = top + (1.0 - v) * lh + 4
        parts.append(f'<text x="{lx + 22}" y="{y:.1f}">{v:.1f}</text>')
    parts.append("</svg>")
    return "\n".join(parts)


def export_heatmap(
    checkpoint_path,
    task_index: int,
    history,
    out_base,
    caps: FeatureCaps = FeatureCaps(),
    questions_completed: int = 0,
) -> dict:
    """Export CSV + SVG for one checkpoint/context; returns written paths."""
    net = load_checkpoint(checkpoint_path).net
    grid = heatmap_grid(net, task_index, history, caps, questions_completed)
    csv_path = f"{out_base}.csv"
    svg_path = f"{out_base}.svg"
    write_heatmap_csv(grid, csv_path)
    hist_label = "".join("T" if h else "F" for h in history) or "-"
    with open(svg_path, "w", encoding="utf-8") as fh:
        fh.write(
            render_heatmap_svg(grid, title=f"P(Allow), task {task_index}, history {hist_label}")
        )
    return {"csv": csv_path, "svg": svg_path, "grid": grid}
