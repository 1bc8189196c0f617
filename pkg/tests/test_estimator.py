import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from rkhsbvp import RKHSBVPSolver, builtin_example


def test_params_round_trip():
    est = RKHSBVPSolver(n_nodes=20, method="collocation")
    params = est.get_params()
    assert params["n_nodes"] == 20 and params["method"] == "collocation"
    assert clone(est).get_params() == params
    est.set_params(tol=1e-8)
    assert est.tol == 1e-8


def test_predict_before_fit():
    with pytest.raises(NotFittedError):
        RKHSBVPSolver().predict([0.5])


def test_fit_predict_linear():
    est = RKHSBVPSolver().fit(builtin_example("4.1"))
    x = np.linspace(0, 1, 11)
    assert est.score(x, x * (1 - x) * np.exp(x)) >= -1e-5
    assert est.n_iter_ == 1 and est.converged_


def test_methods_agree():
    x = np.linspace(0, 1, 11)
    a = RKHSBVPSolver(method="series").fit(builtin_example("4.1")).predict(x)
    b = RKHSBVPSolver(method="collocation").fit(builtin_example("4.1")).predict(x)
    assert np.abs(a - b).max() <= 1e-8


def test_fit_nonlinear_and_derivative():
    est = RKHSBVPSolver(n_nodes=24).fit(builtin_example("4.2"))
    assert est.n_iter_ >= 2 and est.converged_
    assert est.predict([0.3], deriv=1)[0] == pytest.approx(np.exp(0.3), abs=1e-4)


def test_explicit_nodes_and_file(tmp_path):
    path = tmp_path / "p.bvp"
    path.write_text("interval = 0 1\nrhs = 120\nbc = 0 0 0 0 0\n")
    est = RKHSBVPSolver(nodes=np.linspace(0, 1, 16)).fit(path)
    assert len(est.solution_.basis) == 16
    assert est.predict(0.5).shape == (1,)


def test_bad_method():
    with pytest.raises(ValueError):
        RKHSBVPSolver(method="magic").fit(builtin_example("4.1"))
