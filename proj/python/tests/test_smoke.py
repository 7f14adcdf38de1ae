import math

import numpy as np
import pytest

import calabi_lab as cl


def nodes(n):
    return -1.0 + 2.0 * np.arange(n) / n


def test_flat_has_no_curvature():
    f = np.zeros((16, 16))
    assert np.abs(cl.abreu_scalar_curvature(f)).max() < 1e-12
    e = cl.energies(f)
    assert e["calabi_energy"] == 0.0
    assert not e["weak"]


def test_cosine_curvature_matches_closed_form():
    a = 0.05
    x = nodes(64)
    w = 1 - a * math.pi**2 * np.cos(math.pi * x)
    w1 = a * math.pi**3 * np.sin(math.pi * x)
    w2 = a * math.pi**4 * np.cos(math.pi * x)
    expected = -(2 * w1**2 / w**3 - w2 / w**2)
    s = cl.abreu_scalar_curvature(a * np.cos(math.pi * x))
    assert s.shape == (64,)
    assert np.abs(s - expected).max() < 1e-8


def test_legendre_round_trip():
    xi = nodes(64)
    phi = 0.05 * np.cos(math.pi * xi)
    phi -= phi.mean()
    back = cl.inverse_legendre_transform(cl.legendre_transform(phi))
    assert np.abs(back - phi).max() < 1e-8


def test_flow_dissipates():
    x = nodes(32)
    f = 0.04 * np.cos(math.pi * x)
    out = cl.run_flow(f, t_end=1e-3, monitor_every=50)
    assert out["status"] == "completed"
    calabi = [r["calabi"] for r in out["rows"]]
    assert all(b <= a * (1 + 1e-8) for a, b in zip(calabi, calabi[1:]))


def test_constants_ledger():
    led = cl.constants(1.0, 1.0, 1.0, 2)
    assert led["C3"] == pytest.approx(81.0)
    assert led["R0"] == 2.0**438


def test_prop31():
    x = np.geomspace(1.0, 1e4, 100001)
    r = cl.prop31_search(x, x**2, 1.1, 1.0, 2)
    assert r["ceiling"] == 64.0
    assert r["x0"] == pytest.approx(4.0154, abs=1e-3)


def test_quartic_and_mollify():
    q = cl.quartic_example(2, 32)
    assert q.shape == (32, 32)
    smooth = cl.mollify(q, 0.2)
    assert np.abs(smooth - q).max() < 0.1
    u = cl.approx_potential(q, 4)
    assert cl.energies(u)["calabi_energy"] > 0


def test_bad_shape_and_config(tmp_path):
    with pytest.raises(ValueError):
        cl.energies(np.zeros((4, 8)))
    with pytest.raises(ValueError):
        cl.run_experiment("flow", {"N": "12"})
    assert cl.run_experiment("bounds", {"out": str(tmp_path)}) == 0
    assert (tmp_path / "ledger.csv").exists()
