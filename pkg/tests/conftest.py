import numpy as np
import pytest

from fftddm.geometry import BoundaryKind, RectSubdomain

D = BoundaryKind.DIRICHLET
N = BoundaryKind.NEUMANN
P = BoundaryKind.PERIODIC

_PAIR_KIND = {"DD": D, "NN": N, "PP": P}


def make_rect(m, n, x_pair="DD", y_pair="DD", dx=1.0, dy=1.0, kappa=0.0,
              sid=0, half=()):
    """Square-pair rectangle helper used all over the tests."""
    bc = {"west": _PAIR_KIND[x_pair], "east": _PAIR_KIND[x_pair],
          "south": _PAIR_KIND[y_pair], "north": _PAIR_KIND[y_pair]}
    return RectSubdomain(id=sid, origin=(0.0, 0.0), m=m, n=n, dx=dx, dy=dy,
                         edge_bc=bc, kappa=kappa,
                         half_cell_dirichlet=frozenset(half))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
