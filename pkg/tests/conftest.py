import numpy as np
import pytest
from hypothesis import strategies as st

from finslerlab import factors as fac
from finslerlab.product_metric import FinslerMetric, FtkMetric, MetricParams, ProductManifold

T_GRID = (0.0, 0.5, 1.0, 5.0)
K_GRID = (2, 3, 4)

MIXES = {
    "polydisk2": ProductManifold.polydisk(2),
    "polydisk3": ProductManifold.polydisk(3),
    "ball2xdisk": ProductManifold((fac.bergman_ball(2), fac.poincare_disk())),
    "fs1xfs2": ProductManifold((fac.fubini_study(1), fac.fubini_study(2))),
    "flat2xdisk": ProductManifold((fac.euclidean(2), fac.poincare_disk())),
}

ALL_FACTORS = (fac.poincare_disk(), fac.bergman_ball(2), fac.bergman_ball(3),
               fac.fubini_study(1), fac.fubini_study(2), fac.euclidean(2))


@pytest.fixture
def rng():
    return np.random.default_rng(20241)


@pytest.fixture
def polydisk2():
    return ProductManifold.polydisk(2)


class ConformalControl(FinslerMetric):
    """``exp(sigma(z)) F_{t,k}`` with nonconstant ``sigma``.

    Complex Berwald (its connection shifts by ``2 d sigma (v)``, which is
    linear in ``v``) but its real spray is not quadratic once ``t > 0``.
    """

    def __init__(self, mfd, params):
        super().__init__(mfd)
        self.base = FtkMetric(mfd, params)

    def sigma(self, z):
        return float(np.real(np.vdot(z, z) + z[0]))

    def G(self, z, v):
        return np.exp(2.0 * self.sigma(z)) * self.base.G(z, v)


def complex_vectors(n, max_abs=3.0):
    comp = st.floats(-max_abs, max_abs, allow_nan=False, allow_infinity=False)
    return st.lists(st.tuples(comp, comp), min_size=n, max_size=n).map(
        lambda xs: np.array([complex(a, b) for a, b in xs])).filter(lambda v: np.linalg.norm(v) > 1e-2)


def disk_points(n, radius=0.8):
    r = st.floats(0.0, radius)
    ang = st.floats(0.0, 2 * np.pi)
    return st.lists(st.tuples(r, ang), min_size=n, max_size=n).map(
        lambda xs: np.array([a * np.exp(1j * b) for a, b in xs]))


params_strategy = st.builds(MetricParams, st.sampled_from(T_GRID), st.sampled_from(K_GRID))


ACCEPTANCE_LINES = []


def record_criterion(number, title, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} criterion {number} ({title}): {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2])):
            terminalreporter.write_line(line)
