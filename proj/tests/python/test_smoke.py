import json
import math

import numpy as np
import pytest

import fracmem


def interval_operator(n=32, s=0.5):
    dom = fracmem.build_domain(fracmem.ShapeSpec.interval(-1.0, 1.0), n)
    return dom, fracmem.assemble(dom, s)


def test_kernel_constant():
    assert math.isclose(fracmem.kernel_constant(1, 0.5), 1.0 / math.pi, rel_tol=1e-14)


def test_operator_roundtrip():
    dom, op = interval_operator()
    assert dom.size == 32 and op.size == 32
    assert math.isclose(dom.measure, 2.0)
    m = op.dense_matrix()
    assert np.allclose(m, m.T, rtol=0, atol=1e-14)
    u = np.linspace(0.0, 1.0, 32)
    assert np.allclose(op.apply(u), m @ u, rtol=1e-12, atol=1e-12)
    assert math.isclose(fracmem.quadratic_form(op, u), float(u @ m @ u) * dom.h, rel_tol=1e-12)


def test_eigenpair_and_optimize():
    dom, op = interval_operator(n=24, s=0.25)
    lam, u = fracmem.smallest_eigenpair(op)
    assert lam > 0 and np.all(u > 0)
    res = fracmem.optimize(op, 1.0, 0.5)
    assert res["lambda"] > lam
    assert sum(res["in_d"]) == round(0.5 / dom.h)
    assert math.isclose(fracmem.lambda_opt(op, 1.0, 0.5), res["lambda"], rel_tol=1e-12)
    in_d, t = fracmem.rearrange(u, dom, 0.5)
    assert sum(in_d) == round(0.5 / dom.h)


def test_alpha_bar_and_conversion():
    _, op = interval_operator(n=24)
    alpha, residual = fracmem.alpha_bar(op, 0.5)
    assert abs(residual) < 1e-8 and alpha > 0
    a, area, lam = fracmem.pn_convert(0.0, 1.0, 0.5, 3.0, 1.0)
    assert (a, area, lam) == pytest.approx((3.0, 0.5, 3.0))
    back = fracmem.pn_inverse(a, area, lam, 1.0, 3.0)
    assert back == pytest.approx((0.0, 1.0, 0.5, 3.0), abs=1e-14)


def test_symmetry_tools():
    dom = fracmem.build_domain(fracmem.ShapeSpec.annulus(1.0), 24)
    xy = dom.centers()
    half = (xy[:, 1] > 0).astype(float)
    assert math.isclose(fracmem.asymmetry(half, dom), 0.25, rel_tol=1e-12)
    assert fracmem.b_operator(1.0, [0.0, 1.0, 0.0], 1.5, 0.25, 1) > 0
    rect = fracmem.build_domain(fracmem.ShapeSpec.rectangle(1.0, 1.0), 8)
    v = fracmem.steiner(np.arange(64, dtype=float), rect, 0)
    assert sorted(v) == sorted(range(64))


def test_errors():
    dom, _ = interval_operator()
    with pytest.raises(ValueError):
        fracmem.assemble(dom, 1.5)
    assert issubclass(fracmem.SolverError, RuntimeError)


def test_run_command(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"domain": {"shape": "interval", "lo": -1, "hi": 1}, "resolution": 16}))
    code, err = fracmem.run_command("optimize", str(cfg), str(tmp_path / "out"))
    assert code == 0, err
    assert (tmp_path / "out" / "result.json").exists()
    cfg.write_text(json.dumps({"s": -1}))
    code, err = fracmem.run_command("optimize", str(cfg), str(tmp_path / "bad"))
    assert code == 2 and "s" in err
