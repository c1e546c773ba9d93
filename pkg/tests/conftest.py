"""Shared fixtures: the expensive pipeline objects are built once per
session at the reference two-cut parameter t = 4 e^{i pi/3}."""

import sys
import pathlib

import pytest
from mpmath import mp, mpf, mpc, exp, pi, workdps

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parent.parent / "src"))

from twocut.precision import PrecisionContext, CTX64
from twocut.curve import EndpointSolver, CutSystem, solve_endpoints_two_cut
from twocut.surface import compute_constants
from twocut.predict import Predictor
from twocut.phase import PhaseDiagram


def t_reference():
    with workdps(80):
        return 4 * exp(mpc(0, 1) * pi / 3)


@pytest.fixture(scope="session")
def ctx():
    return CTX64


@pytest.fixture(scope="session")
def solver(ctx):
    return EndpointSolver(ctx)


@pytest.fixture(scope="session")
def endpoints_ref(solver):
    return solver.solve(t_reference())


@pytest.fixture(scope="session")
def cuts_ref(endpoints_ref):
    return CutSystem(endpoints_ref)


@pytest.fixture(scope="session")
def constants_ref(cuts_ref, ctx):
    return compute_constants(cuts_ref, ctx)


@pytest.fixture(scope="session")
def predictor_ref(constants_ref, ctx):
    return Predictor(constants_ref, ctx)


@pytest.fixture(scope="session")
def phase_diagram():
    return PhaseDiagram()
