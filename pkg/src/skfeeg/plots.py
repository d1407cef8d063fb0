"""Plain-markup SVG time-series plots and panel grids.

Per cell (averaged over repetitions) one plot shows the two true source
waveforms and the reconstructed amplitude at the two true nodes. The
reconstruction is rescaled to the true peak amplitude because
standardized values have no physical unit.
"""

import csv
from collections import defaultdict
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

__all__ = ["cell_svg", "panel_svg", "emit_plots", "load_traces", "cell_name"]

W, H = 360, 240
ML, MR, MT, MB = 52, 12, 28, 40
COLORS = {"true_deep": "#2e7d32", "true_sup": "#c62828",
          "recon_deep": "#66bb6a", "recon_sup": "#ef5350"}
LABELS = {"true_deep": "true deep", "true_sup": "true superficial",
          "recon_deep": "recon @ deep node", "recon_sup": "recon @ superficial node"}


def _num(x):
    return f"{x:.2f}"


def cell_name(ep, pm, noise, alpha, smoothing):
    tag = "smooth" if smoothing else "filter"
    return f"cell_ep{ep:g}_pm{pm:g}_noise{noise:g}_alpha{alpha:g}_{tag}.svg"


def cell_svg(times, curves, title, amplitude_label="amplitude (nA*m)"):
    """SVG document with one polyline per entry in ``curves`` (name -> values)."""
    times = np.asarray(times, dtype=float)
    ymax = max(float(np.nanmax(v)) for v in curves.values())
    ymax = ymax if ymax > 0 else 1.0
    t0, t1 = float(times[0]), float(times[-1])
    span = t1 - t0 if t1 > t0 else 1.0
    pw, ph = W - ML - MR, H - MT - MB

    def xy(t, v):
        return ML + pw * (t - t0) / span, MT + ph * (1.0 - v / ymax)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" '
        f'viewBox="0 0 {W} {H}">',
        '<rect width="100%" height="100%" fill="white"/>',
        f'<text x="{W / 2}" y="16" text-anchor="middle" font-size="11">{escape(title)}</text>',
        f'<line x1="{ML}" y1="{MT + ph}" x2="{ML + pw}" y2="{MT + ph}" stroke="black"/>',
        f'<line x1="{ML}" y1="{MT}" x2="{ML}" y2="{MT + ph}" stroke="black"/>',
        f'<text x="{ML + pw / 2}" y="{H - 8}" text-anchor="middle" font-size="10">time (s)</text>',
        f'<text x="12" y="{MT + ph / 2}" text-anchor="middle" font-size="10" '
        f'transform="rotate(-90 12 {MT + ph / 2})">{escape(amplitude_label)}</text>',
        f'<text x="{ML}" y="{MT + ph + 14}" text-anchor="middle" font-size="9">{t0:g}</text>',
        f'<text x="{ML + pw}" y="{MT + ph + 14}" text-anchor="middle" font-size="9">{t1:g}</text>',
        f'<text x="{ML - 4}" y="{MT + 4}" text-anchor="end" font-size="9">{ymax:.3g}</text>',
    ]
    for i, (name, values) in enumerate(curves.items()):
        pts = " ".join(f"{_num(x)},{_num(y)}" for x, y in (xy(t, v) for t, v in zip(times, values)))
        dash = ' stroke-dasharray="4 3"' if name.startswith("true") else ""
        color = COLORS.get(name, "black")
        parts.append(f'<polyline class="{name}" fill="none" stroke="{color}" '
                     f'stroke-width="1.5"{dash} points="{pts}"/>')
        parts.append(f'<text x="{ML + pw - 4}" y="{MT + 10 + 11 * i}" text-anchor="end" '
                     f'font-size="9" fill="{color}">{escape(LABELS.get(name, name))}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _inner(svg):
    start = svg.index(">", svg.index("<svg")) + 1
    return svg[start:svg.rindex("</svg>")]


def panel_svg(grid, row_labels, col_labels, title):
    """Grid of sub-plots. ``grid[i][j]`` is ``(href, svg_text)`` or ``None`` (missing)."""
    nr, nc = len(row_labels), len(col_labels)
    lw, th = 70, 30
    width, height = lw + nc * W, th + 20 + nr * H
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" xmlns:xlink="http://www.w3.org/1999/xlink" '
        f'width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
        '<rect width="100%" height="100%" fill="white"/>',
        f'<text x="{width / 2}" y="18" text-anchor="middle" font-size="13">{escape(title)}</text>',
    ]
    for j, lab in enumerate(col_labels):
        parts.append(f'<text x="{lw + j * W + W / 2}" y="{th + 12}" text-anchor="middle" '
                     f'font-size="11">{escape(lab)}</text>')
    for i, lab in enumerate(row_labels):
        y0 = th + 20 + i * H
        parts.append(f'<text x="{lw / 2}" y="{y0 + H / 2}" text-anchor="middle" '
                     f'font-size="11">{escape(lab)}</text>')
        for j in range(nc):
            x0 = lw + j * W
            cell = grid[i][j]
            if cell is None:
                parts.append(f'<g class="missing" transform="translate({x0},{y0})">'
                             f'<rect width="{W}" height="{H}" fill="#eeeeee" stroke="#999999"/>'
                             f'<text x="{W / 2}" y="{H / 2}" text-anchor="middle" '
                             f'font-size="12">missing</text></g>')
                continue
            href, svg = cell
            parts.append(f'<a href="{escape(href)}" xlink:href="{escape(href)}">'
                         f'<svg x="{x0}" y="{y0}" width="{W}" height="{H}" '
                         f'viewBox="0 0 {W} {H}" data-cell="{escape(href)}">'
                         f'{_inner(svg)}</svg></a>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def load_traces(results_dir):
    """Mean traces per cell from ``traces.csv``: key -> dict of arrays."""
    acc = defaultdict(lambda: defaultdict(list))
    with open(Path(results_dir) / "traces.csv", newline="") as fh:
        for row in csv.DictReader(fh):
            key = (float(row["ep_snr_db"]), float(row["pm_snr_db"]), float(row["noise_db"]),
                   float(row["alpha"]), row["smoothing"] == "true")
            rep, step = int(row["rep"]), int(row["step"])
            acc[key][rep].append((step, float(row["time_s"]), float(row["true_deep"]),
                                  float(row["true_sup"]), float(row["recon_deep"]),
                                  float(row["recon_sup"])))
    out = {}
    for key, reps in acc.items():
        arrs = [np.array(sorted(v)) for _, v in sorted(reps.items())]
        stack = np.stack(arrs)
        out[key] = {
            "time": stack[0, :, 1],
            "true_deep": stack[0, :, 2],
            "true_sup": stack[0, :, 3],
            "recon_deep": stack[:, :, 4].mean(axis=0),
            "recon_sup": stack[:, :, 5].mean(axis=0),
        }
    return out


def _cell_document(key, tr):
    ep, pm, noise, alpha, smoothing = key
    truth_peak = max(tr["true_deep"].max(), tr["true_sup"].max())
    recon_peak = max(tr["recon_deep"].max(), tr["recon_sup"].max())
    scale = truth_peak / recon_peak if recon_peak > 0 else 1.0
    curves = {
        "true_deep": tr["true_deep"],
        "true_sup": tr["true_sup"],
        "recon_deep": tr["recon_deep"] * scale,
        "recon_sup": tr["recon_sup"] * scale,
    }
    title = (f"EP {ep:g} dB, PM {pm:g} dB, noise {noise:g} dB, alpha {alpha:g}, "
             f"{'smoothed' if smoothing else 'filtered'}")
    return cell_svg(tr["time"], curves, title)


def emit_plots(results_dir, output_dir):
    """Write per-cell plots and panel grids; returns the list of files written.

    Panels: one EP x PM grid per (noise, alpha, smoothing), and, when more
    than one exponent was run, one exponent row per (noise, EP, PM,
    smoothing).
    """
    traces = load_traces(results_dir)
    if not traces:
        raise ValueError(f"no traces found in {results_dir}")
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    docs = {}
    for key in sorted(traces):
        name = cell_name(*key)
        docs[key] = (name, _cell_document(key, traces[key]))
        (out / name).write_text(docs[key][1])
        written.append(out / name)

    eps = sorted({k[0] for k in traces})
    pms = sorted({k[1] for k in traces})
    noises = sorted({k[2] for k in traces})
    alphas = sorted({k[3] for k in traces})
    smooths = sorted({k[4] for k in traces})
    for noise in noises:
        for alpha in alphas:
            for sm in smooths:
                grid = [[docs.get((ep, pm, noise, alpha, sm)) for pm in pms] for ep in eps]
                if all(c is None for row in grid for c in row):
                    continue
                tag = "smooth" if sm else "filter"
                name = f"panel_noise{noise:g}_alpha{alpha:g}_{tag}.svg"
                title = f"noise {noise:g} dB, alpha {alpha:g}, {'smoothed' if sm else 'filtered'}"
                doc = panel_svg(grid, [f"EP {e:g}" for e in eps], [f"PM {p:g}" for p in pms], title)
                (out / name).write_text(doc)
                written.append(out / name)
        if len(alphas) > 1:
            for ep in eps:
                for pm in pms:
                    for sm in smooths:
                        row = [docs.get((ep, pm, noise, a, sm)) for a in alphas]
                        if all(c is None for c in row):
                            continue
                        tag = "smooth" if sm else "filter"
                        name = f"alpha_panel_noise{noise:g}_ep{ep:g}_pm{pm:g}_{tag}.svg"
                        title = (f"exponent study: noise {noise:g} dB, EP {ep:g}, PM {pm:g}, "
                                 f"{'smoothed' if sm else 'filtered'}")
                        doc = panel_svg([row], [""], [f"alpha {a:g}" for a in alphas], title)
                        (out / name).write_text(doc)
                        written.append(out / name)
    return written
