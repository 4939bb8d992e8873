import numpy as np
import pytest

from homogeodesy.algebra import BasisMatrix, GramRule, assemble_algebra
from homogeodesy.homogeneous import ReductiveSpace
from homogeodesy.matrices import a_matrix


@pytest.fixture(scope="session")
def abelian_space() -> ReductiveSpace:
    """A flat 2-torus worth of tangent directions: [m, m] = 0, empty isotropy."""
    basis = [
        BasisMatrix("t_1", a_matrix(4, 1, 2)),
        BasisMatrix("t_2", a_matrix(4, 3, 4)),
    ]
    alg = assemble_algebra(basis, GramRule(coeff=0.5), name="torus")
    return ReductiveSpace(
        algebra=alg, k_indices=(), m_indices=(0, 1), name="torus", params={"family": "torus"}
    )


@pytest.fixture(scope="session")
def rng() -> np.random.Generator:
    return np.random.default_rng(20240817)
