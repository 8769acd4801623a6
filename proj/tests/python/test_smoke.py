import json
import math

import numpy as np
import pytest

import qgraph


def interval_basis(h=1.0 / 256, modes=10):
    mesh = qgraph.Mesh(qgraph.MetricGraph.interval(), h)
    form = qgraph.assemble_form(mesh)
    return mesh, form, qgraph.eigensolve(mesh, form, modes)


def test_graph_from_json():
    text = json.dumps({"vertices": ["a", "b", "c"],
                       "edges": [{"from": "a", "to": "b", "length": 1.0},
                                 {"from": "b", "to": "c", "length": 2.0, "c": 3.0}]})
    g = qgraph.MetricGraph.from_json(text)
    assert g.vertex_count == 3 and g.edge_count == 2
    assert g.vertex_ids == ["a", "b", "c"]
    assert g.edges[1].conductance == 3.0
    assert g.degree(g.vertex_index("b")) == 2
    assert g.total_length() == pytest.approx(3.0)


def test_errors_carry_kind():
    with pytest.raises(qgraph.QGraphError) as info:
        qgraph.Mesh(qgraph.MetricGraph.interval(), 1.5)
    assert info.value.kind == "MeshTooCoarse"
    with pytest.raises(qgraph.QGraphError) as info:
        qgraph.MetricGraph.from_json('{"vertices": ["a"], "edges": [{"from": "a", "to": "a", "length": 1}]}')
    assert info.value.kind == "LoopEdge"


def test_interval_spectrum():
    mesh, form, basis = interval_basis()
    k = np.arange(10)
    assert basis.lambdas[0] == pytest.approx(0.0, abs=1e-8)
    assert np.allclose(basis.lambdas[1:], -(math.pi * k[1:]) ** 2, rtol=2e-3)
    gram = basis.eigvecs.T @ (form.M @ basis.eigvecs)
    assert np.allclose(gram, np.eye(10), atol=1e-9)
    assert form.K.shape == (mesh.dof_count, mesh.dof_count)


def test_dirichlet_column():
    mesh = qgraph.Mesh(qgraph.MetricGraph.interval(), 1.0 / 512)
    form = qgraph.assemble_form(mesh)
    dk = qgraph.dirichlet_map_K(mesh, form, 1.0)
    u0 = dk.columns[mesh.vertex_dof(0), 0]
    assert u0 == pytest.approx(1.0 / math.tanh(1.0), rel=1e-5)


def test_adjoint_drives_are_vertex_traces():
    g = qgraph.MetricGraph.star(3)
    mesh = qgraph.Mesh(g, 1.0 / 128)
    form = qgraph.assemble_form(mesh)
    basis = qgraph.eigensolve(mesh, form, 20)
    dk = qgraph.dirichlet_map_K(mesh, form, 1.0)
    drive = qgraph.drive_from_adjoint(basis, qgraph.adjoint_coefficients(mesh, form, basis, dk), 1.0)
    assert np.allclose(drive, basis.vertex_traces, atol=1e-8)


def test_ou_ensemble_matches_exact_variance():
    _, _, basis = interval_basis(modes=6)
    cfg = qgraph.NoiseConfig(np.eye(2), seed=7, dt=0.01, T=1.0)
    ens = qgraph.make_ensemble(basis.lambdas, qgraph.build_drive_K(basis), cfg)
    times, states = qgraph.simulate_ensemble(ens, cfg, 2000, [1.0], threads=2)
    exact = qgraph.exact_covariance(ens, 1.0)
    ms = (states[0] ** 2).mean(axis=0)
    assert times[0] == pytest.approx(1.0)
    assert np.all(np.abs(ms - exact) < 0.15 * exact)
    _, again = qgraph.simulate_ensemble(ens, cfg, 2000, [1.0], threads=1)
    assert np.array_equal(states[0], again[0])


def test_series_verdict_needs_modes():
    with pytest.raises(qgraph.QGraphError) as info:
        qgraph.classify_series(np.ones(10))
    assert info.value.kind == "InsufficientModes"
    k = np.arange(1, 401, dtype=float)
    assert qgraph.classify_series(k ** -2.0)["verdict"] == "converging"
    assert qgraph.classify_series(k ** -0.5)["verdict"] == "diverging"


def test_surjectivity():
    g = qgraph.MetricGraph.star(3)
    z = np.linspace(-1.0, 1.0, 2 * g.edge_count)
    result = qgraph.surjectivity_construct(g, z)
    assert result.residual_inf < 1e-10
    assert result.contraction < 1.0


def test_mild_heat_decay():
    mesh, form, basis = interval_basis(h=1.0 / 512)
    space = qgraph.GalerkinSpace(mesh, form, basis)
    x0 = np.zeros(basis.mode_count)
    x0[1] = 1.0
    times, coeffs = qgraph.solve_mild(space, qgraph.Drift.zero(), x0=x0, T=0.5, dt=0.01)
    assert times[-1] == pytest.approx(0.5)
    assert np.linalg.norm(coeffs[:, -1]) == pytest.approx(math.exp(-math.pi ** 2 * 0.5), rel=1e-4)


def test_mild_with_noise_is_reproducible():
    mesh, form, basis = interval_basis(modes=8)
    space = qgraph.GalerkinSpace(mesh, form, basis)
    cfg = qgraph.NoiseConfig(np.eye(2), seed=3, dt=0.01, T=0.2)
    ens = qgraph.make_ensemble(basis.lambdas, qgraph.build_drive_K(basis), cfg)
    x0 = np.zeros(8)
    run = lambda: qgraph.solve_mild(space, qgraph.Drift.cubic(), ens, cfg, 0, x0=x0, T=0.2, dt=0.01)[1]
    a, b = run(), run()
    assert np.array_equal(a, b)
    assert np.all(np.isfinite(a)) and np.abs(a).max() > 0.0
