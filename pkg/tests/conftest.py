import numpy as np
import pytest


class CountingSource:
    """Replayable row source that counts how many passes consume it."""

    def __init__(self, matrix):
        self.matrix = np.asarray(matrix, dtype=np.float64)
        self.passes = 0

    def __call__(self):
        self.passes += 1
        return iter(self.matrix)


@pytest.fixture
def counting_source():
    return CountingSource
