import numpy as np
import pytest

from fourier_contours.efd import Contour, FourierDescriptor


def circle(r=1.0, center=(0.0, 0.0), n=360):
    t = 2 * np.pi * np.arange(n) / n
    return Contour(np.column_stack([center[0] + r * np.cos(t), center[1] + r * np.sin(t)]))


def ellipse(p, q, center=(0.0, 0.0), n=360):
    t = 2 * np.pi * np.arange(n) / n
    return Contour(np.column_stack([center[0] + p * np.cos(t), center[1] + q * np.sin(t)]))


def square(side=1.0, origin=(0.0, 0.0)):
    x, y = origin
    return Contour([[x, y], [x + side, y], [x + side, y + side], [x, y + side]])


def circle_descriptor(r, center=(0.0, 0.0), n_harmonics=7):
    coeffs = np.zeros((n_harmonics, 4))
    coeffs[0, 1] = r
    coeffs[0, 2] = r
    return FourierDescriptor(center, coeffs)


def random_descriptor(rng, n_harmonics=7, radius=40.0, decay=2.0, center_scale=200.0):
    levels = np.arange(1, n_harmonics + 1)
    coeffs = rng.uniform(-1, 1, (n_harmonics, 4)) * (radius / levels ** decay)[:, None]
    return FourierDescriptor(rng.uniform(0, center_scale, 2), coeffs)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
