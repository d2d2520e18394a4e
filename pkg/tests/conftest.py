import cmath

import numpy as np
import pytest

from pvasym import config
from pvasym.monodromy import (MonodromyData, ThetaParams, asymptotic_params,
                              from_parameters)

THETA = ThetaParams(0.3, 0.1, 0.2)
CHART = (0.2 + 0.1j, -0.3 + 0.2j, 1.1 - 0.4j)


def triangular_data(theta):
    """
    Data on the manifold with ``m0_21 = 0``
    """
    a = cmath.exp(1j * np.pi * theta.theta0)
    M0 = np.array([[a, 0.7], [0, 1 / a]], dtype=complex)
    m11 = cmath.exp(-1j * np.pi * theta.theta_inf) / a
    m22 = 2 * cmath.cos(np.pi * theta.theta1) - m11
    M1 = np.array([[m11, 1], [m11 * m22 - 1, m22]], dtype=complex)
    return MonodromyData(M0=M0, M1=M1, theta=theta)


@pytest.fixture(autouse=True)
def fresh_config():
    config.reset()
    yield
    config.reset()


@pytest.fixture(scope='session')
def theta():
    return THETA


@pytest.fixture(scope='session')
def monodromy_data():
    return from_parameters(THETA, *CHART)


@pytest.fixture(scope='session')
def params_pi5(monodromy_data):
    return asymptotic_params(monodromy_data, np.pi / 5)


@pytest.fixture(scope='session')
def params_minus_pi3(monodromy_data):
    return asymptotic_params(monodromy_data, -np.pi / 3)
