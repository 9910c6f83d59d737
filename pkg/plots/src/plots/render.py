"""Render figures from run-artifact CSV/JSON files.

Three figure kinds are supported:

- ``hist_overlay``: histogram bars from a (bin_left, bin_right, count) CSV,
  normalized to a density, with an optional (x, density) reference curve.
- ``decay_loglin``: one or more (t, value) series on a log-linear axis,
  with fitted rate lines taken from rate-fit JSON files given as inputs.
- ``heatmap_2d``: a (bin_x, bin_y, count) CSV shown as a 2D density map.

Rendering is read-only over its inputs and atomic over its outputs: on any
error no image file is left behind.
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass

import matplotlib
import numpy as np

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402


class PlotError(Exception):
    """Bad figure request or unusable input data."""


_KINDS = ("hist_overlay", "decay_loglin", "heatmap_2d")
_FORMATS = (".png", ".svg")


@dataclass(frozen=True)
class FigureRequest:
    """One figure: what to draw, from which files, to which image path.

    ``output`` may carry a .png or .svg suffix or none at all; both formats
    are always written, sharing the stem.
    """

    kind: str
    inputs: tuple
    output: str
    reference: str | None = None
    title: str = ""

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise PlotError(f"unknown figure kind {self.kind!r}; expected one of {_KINDS}")
        object.__setattr__(self, "inputs", tuple(self.inputs))
        if not self.inputs:
            raise PlotError("figure request needs at least one input file")

    @classmethod
    def from_dict(cls, d: dict) -> "FigureRequest":
        if not isinstance(d, dict):
            raise PlotError("each figure entry must be a JSON object")
        unknown = set(d) - {"kind", "inputs", "output", "reference", "title"}
        if unknown:
            raise PlotError(f"unknown figure fields: {sorted(unknown)}")
        try:
            return cls(
                kind=d["kind"],
                inputs=tuple(d["inputs"]),
                output=d["output"],
                reference=d.get("reference"),
                title=d.get("title", ""),
            )
        except KeyError as exc:
            raise PlotError(f"figure entry is missing required field {exc.args[0]!r}") from None

    def output_paths(self) -> list:
        stem, ext = os.path.splitext(self.output)
        if ext and ext not in _FORMATS:
            raise PlotError(f"unsupported image suffix {ext!r}; use .png or .svg")
        if not ext:
            stem = self.output
        return [stem + fmt for fmt in _FORMATS]


def _read_csv(path: str, columns: tuple) -> dict:
    """Load the named columns as float arrays; errors name the column."""
    if not os.path.exists(path):
        raise PlotError(f"input file not found: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for col in columns:
            if col not in header:
                raise PlotError(
                    f"{path}: missing column {col!r} (header has {header})"
                )
        rows = [[float(row[c]) for c in columns] for row in reader]
    if not rows:
        raise PlotError(f"{path}: no data rows")
    arr = np.array(rows, dtype=float)
    return {c: arr[:, i] for i, c in enumerate(columns)}


def _read_fit(path: str) -> dict:
    with open(path, encoding="utf-8") as fh:
        fit = json.load(fh)
    for key in ("rate", "intercept", "window"):
        if key not in fit:
            raise PlotError(f"{path}: rate-fit JSON is missing field {key!r}")
    return fit


def _draw_hist_overlay(req: FigureRequest, ax) -> None:
    for path in req.inputs:
        h = _read_csv(path, ("bin_left", "bin_right", "count"))
        widths = h["bin_right"] - h["bin_left"]
        if np.any(widths <= 0):
            raise PlotError(f"{path}: non-positive bin widths")
        total = float(h["count"].sum())
        if total <= 0:
            raise PlotError(f"{path}: histogram is empty (all counts zero)")
        density = h["count"] / (total * widths)
        ax.bar(h["bin_left"], density, width=widths, align="edge",
               alpha=0.6, edgecolor="none", label=os.path.basename(path))
    if req.reference:
        ref = _read_csv(req.reference, ("x", "density"))
        ax.plot(ref["x"], ref["density"], "r-", lw=1.8, label="reference density")
    ax.set_xlabel("x")
    ax.set_ylabel("density")
    ax.legend(fontsize=8)


def _draw_decay_loglin(req: FigureRequest, ax) -> None:
    series = [p for p in req.inputs if not p.endswith(".json")]
    fits = [p for p in req.inputs if p.endswith(".json")]
    if not series:
        raise PlotError("decay figure needs at least one (t, value) series CSV")
    for path in series:
        s = _read_csv(path, ("t", "value"))
        if np.all(s["value"] <= 0):
            raise PlotError(f"{path}: no positive values to plot on a log axis")
        ax.semilogy(s["t"], s["value"], "o-", ms=3, lw=1,
                    label=os.path.basename(path))
    for path in fits:
        fit = _read_fit(path)
        t0, t1 = fit["window"]
        tt = np.linspace(t0, t1, 50)
        ax.semilogy(tt, np.exp(fit["intercept"] + fit["rate"] * tt), "--", lw=1.5,
                    label=f"fit rate {fit['rate']:.3g}")
    ax.set_xlabel("t")
    ax.set_ylabel("value")
    ax.legend(fontsize=8)


def _draw_heatmap_2d(req: FigureRequest, fig, ax) -> None:
    if len(req.inputs) != 1:
        raise PlotError("heatmap takes exactly one (bin_x, bin_y, count) input")
    h = _read_csv(req.inputs[0], ("bin_x", "bin_y", "count"))
    xs = np.unique(h["bin_x"])
    ys = np.unique(h["bin_y"])
    if xs.size * ys.size != h["count"].size:
        raise PlotError(f"{req.inputs[0]}: bins do not form a full grid")
    if float(h["count"].sum()) <= 0:
        raise PlotError(f"{req.inputs[0]}: histogram is empty (all counts zero)")
    grid = np.zeros((xs.size, ys.size))
    ix = np.searchsorted(xs, h["bin_x"])
    iy = np.searchsorted(ys, h["bin_y"])
    grid[ix, iy] = h["count"]
    dx = xs[1] - xs[0] if xs.size > 1 else 1.0
    dy = ys[1] - ys[0] if ys.size > 1 else 1.0
    im = ax.imshow(
        grid.T, origin="lower", aspect="equal", cmap="viridis",
        extent=(xs[0], xs[-1] + dx, ys[0], ys[-1] + dy),
    )
    fig.colorbar(im, ax=ax, label="count")
    ax.set_xlabel("x")
    ax.set_ylabel("y")


def render(req: FigureRequest) -> list:
    """Draw one figure and write it as both PNG and SVG.

    Returns the written paths.  All input parsing happens before any file
    is created, and a failed save removes whatever was partially written.
    """
    outputs = req.output_paths()
    out_dir = os.path.dirname(os.path.abspath(outputs[0]))
    if not os.path.isdir(out_dir) or not os.access(out_dir, os.W_OK):
        raise PlotError(f"output directory is not writable: {out_dir}")
    fig, ax = plt.subplots(figsize=(6.0, 4.0), dpi=120)
    written = []
    try:
        if req.kind == "hist_overlay":
            _draw_hist_overlay(req, ax)
        elif req.kind == "decay_loglin":
            _draw_decay_loglin(req, ax)
        else:
            _draw_heatmap_2d(req, fig, ax)
        if req.title:
            ax.set_title(req.title)
        fig.tight_layout()
        for path in outputs:
            fig.savefig(path)
            written.append(path)
    except BaseException:
        for path in written:
            if os.path.exists(path):
                os.remove(path)
        raise
    finally:
        plt.close(fig)
    return outputs


def render_spec(spec_path: str) -> list:
    """Render every figure listed in a JSON spec file; returns all paths.

    The spec is either a JSON array of figure objects or an object with a
    ``figures`` array.
    """
    with open(spec_path, encoding="utf-8") as fh:
        doc = json.load(fh)
    entries = doc.get("figures") if isinstance(doc, dict) else doc
    if not isinstance(entries, list) or not entries:
        raise PlotError("figure spec must be a non-empty list (or {'figures': [...]})")
    # validate the whole batch before rendering anything
    requests = [FigureRequest.from_dict(e) for e in entries]
    base = os.path.dirname(os.path.abspath(spec_path))

    def absolutize(r: FigureRequest) -> FigureRequest:
        fix = lambda p: p if os.path.isabs(p) else os.path.join(base, p)
        return FigureRequest(
            kind=r.kind,
            inputs=tuple(fix(p) for p in r.inputs),
            output=fix(r.output),
            reference=fix(r.reference) if r.reference else None,
            title=r.title,
        )

    written = []
    for r in requests:
        written.extend(render(absolutize(r)))
    return written
