import numpy as np
import pytest

from uoivar import RegressionForm, TimeSeries, VarParams, build_regression


def raw_form(y, u, m):
    """RegressionForm for synthetic designs: d chosen so d*m+1 matches u."""
    p = u.shape[1]
    d, rem = divmod(p - 1, m)
    assert rem == 0, "synthetic design width must be d*m+1"
    return RegressionForm(y=y, u=u, d=d, m=m)


def make_params(m=2, rho=0.5, seed=None):
    """Stable diagonal system, optionally with a random-signed diagonal."""
    rng = np.random.default_rng(seed)
    diag = np.full(m, rho) if seed is None else rho * rng.choice([-1.0, 1.0], size=m)
    return VarParams(nu=np.zeros(m), a=(np.diag(diag),), sigma=np.eye(m))


def white_noise_series(t_len, m, seed=0):
    rng = np.random.default_rng(seed)
    return TimeSeries(data=rng.standard_normal((t_len + 1, m)))


@pytest.fixture
def small_reg():
    """Well-conditioned 40x(2*3+1) regression form from white noise."""
    return build_regression(white_noise_series(41, 3, seed=7), 2)
