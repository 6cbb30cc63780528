import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def rel_err(a, b):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    denom = max(np.linalg.norm(b), 1e-300)
    return np.linalg.norm(a - b) / denom


def dense_bccb(psf, rows, cols):
    """Dense circular-convolution matrix built entry by entry (test oracle)."""
    psf = np.atleast_2d(psf)
    kr, kc = psf.shape
    cr, cc = kr // 2, kc // 2
    n = rows * cols
    mat = np.zeros((n, n))
    for i in range(rows):
        for j in range(cols):
            out = i * cols + j
            for a in range(kr):
                for b in range(kc):
                    src_i = (i - (a - cr)) % rows
                    src_j = (j - (b - cc)) % cols
                    mat[out, src_i * cols + src_j] += psf[a, b]
    return mat


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
