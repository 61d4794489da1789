"""
Polygon meshes of extension images: ASCII OFF files and plotly figures.
"""

import logging
from pathlib import Path

import numpy as np
import plotly.graph_objects as go

from config import CHART_CONFIG, OUTPUT_CONFIG
from quadrature import make_rule

logger = logging.getLogger(__name__)


def image_mesh(ev, grid, workers=None):
    """
    Applies the extension to a grid and keeps the grid's faces

    Failed points are dropped together with every face that touches them.

    Returns:
        tuple: (vertices (k, 3), faces (f, 3), evaluation table)
    """
    table = ev.evaluate_points(grid.points, workers)
    d = grid.points.shape[1]
    images = table[[f"y{i + 1}" for i in range(d)]].to_numpy()
    ok = np.all(np.isfinite(images), axis=1)
    if not ok.all():
        logger.warning("dropping %d failed points from the mesh", int((~ok).sum()))
    index = np.full(len(images), -1)
    index[ok] = np.arange(ok.sum())
    faces = index[grid.faces] if grid.faces.size else grid.faces
    faces = faces[np.all(faces >= 0, axis=1)] if faces.size else faces
    vertices = images[ok]
    if d < 3:
        vertices = np.hstack([vertices, np.zeros((len(vertices), 3 - d))])
    return vertices[:, :3], faces, table


def to_off(vertices, faces):
    """ASCII OFF text with the fixed float format."""
    fmt = OUTPUT_CONFIG["float_format"]
    lines = ["OFF", f"{len(vertices)} {len(faces)} 0"]
    lines += [" ".join(fmt % c for c in v) for v in vertices]
    lines += ["3 " + " ".join(str(int(i)) for i in face) for face in faces]
    return "\n".join(lines) + "\n"


def write_off(vertices, faces, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(to_off(vertices, faces))
    logger.info("wrote mesh %s (%d vertices, %d faces)", path, len(vertices), len(faces))


def mesh_figure(vertices, faces, title=""):
    """
    Plotly figure of a mesh inside a translucent unit sphere

    Args:
        vertices (np.ndarray): (k, 3) coordinates
        faces (np.ndarray): (f, 3) vertex indices
        title (str): Figure title

    Returns:
        go.Figure
    """
    sphere = make_rule(2, 12).nodes
    fig = go.Figure()
    fig.add_trace(go.Mesh3d(
        x=sphere[:, 0], y=sphere[:, 1], z=sphere[:, 2],
        alphahull=0, opacity=CHART_CONFIG["sphere_opacity"], color=CHART_CONFIG["sphere_color"],
        hoverinfo="skip", name="unit sphere",
    ))
    if len(faces):
        fig.add_trace(go.Mesh3d(
            x=vertices[:, 0], y=vertices[:, 1], z=vertices[:, 2],
            i=faces[:, 0], j=faces[:, 1], k=faces[:, 2],
            intensity=vertices[:, 2], colorscale=CHART_CONFIG["colorscale"], name="image",
        ))
    else:
        fig.add_trace(go.Scatter3d(
            x=vertices[:, 0], y=vertices[:, 1], z=vertices[:, 2],
            mode="markers+lines", marker=dict(size=3), name="image",
        ))

    fig.update_layout(
        title_text=title,
        height=CHART_CONFIG["height"],
        template=CHART_CONFIG["template"],
        scene=dict(aspectmode="cube",
                   xaxis=dict(range=[-1, 1]), yaxis=dict(range=[-1, 1]), zaxis=dict(range=[-1, 1])),
        margin=dict(l=20, r=20, t=50, b=20),
    )
    return fig


def write_html(fig, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.write_html(str(path), include_plotlyjs="cdn")
    logger.info("wrote figure %s", path)
