import numpy as np
import plotly.graph_objects as go

from barycenter import SolverConfig
from extension import ExtensionEvaluator
from grids import Grid, disc_grid
from measures import identity_map
from mesh_export import image_mesh, mesh_figure, to_off, write_html, write_off
from quadrature import make_rule


def identity_evaluator():
    return ExtensionEvaluator(identity_map(2), make_rule(2, 8), SolverConfig())


def test_to_off_layout():
    text = to_off(np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]), np.array([[0, 1, 2]]))
    lines = text.splitlines()
    assert lines[:2] == ["OFF", "3 1 0"]
    assert lines[3] == "1.000000000000000e+00 0.000000000000000e+00 0.000000000000000e+00"
    assert lines[-1] == "3 0 1 2"
    assert text.endswith("\n")


def test_identity_image_keeps_grid():
    grid = disc_grid(3, 5)
    vertices, faces, table = image_mesh(identity_evaluator(), grid, workers=2)
    assert vertices.shape == (13, 3)
    np.testing.assert_allclose(vertices, grid.points, atol=1e-10)
    np.testing.assert_array_equal(faces, grid.faces)
    assert (table["error"] == "").all()


def test_failed_points_drop_their_faces():
    points = np.array([[0.0, 0.0, 0.0], [0.3, 0.0, 0.0], [0.0, 0.3, 0.0], [1.5, 0.0, 0.0]])
    grid = Grid(points, np.array([[0, 1, 2], [1, 2, 3]]), "disc")
    vertices, faces, table = image_mesh(identity_evaluator(), grid, workers=1)
    assert len(vertices) == 3
    np.testing.assert_array_equal(faces, [[0, 1, 2]])
    assert table["error"].tolist()[-1] == "INVALID_POINT"


def test_write_off_and_html(tmp_path):
    vertices = np.array([[0.0, 0.0, 0.0], [0.5, 0.0, 0.0], [0.0, 0.5, 0.0]])
    faces = np.array([[0, 1, 2]])
    off = tmp_path / "out" / "mesh.off"
    write_off(vertices, faces, off)
    assert off.read_text() == to_off(vertices, faces)

    fig = mesh_figure(vertices, faces, "identity")
    assert [type(t) for t in fig.data] == [go.Mesh3d, go.Mesh3d]
    html = tmp_path / "mesh.html"
    write_html(fig, html)
    assert html.read_text().lstrip().startswith("<html>")


def test_figure_without_faces_draws_markers():
    fig = mesh_figure(np.zeros((2, 3)), np.zeros((0, 3), dtype=int))
    assert isinstance(fig.data[1], go.Scatter3d)
