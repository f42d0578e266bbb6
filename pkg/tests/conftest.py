"""Shared fixtures: shipped measure fixtures and slow session-scoped builds."""

import pathlib

import numpy as np
import pytest

from matszego import specio
from matszego.measure import MatrixMeasure, SemicircleDensity, make_measure
from matszego.polynomials import PolySequence, stieltjes

SPECS_DIR = pathlib.Path(__file__).resolve().parent.parent / "specs"

SHIPPED = [
    "free_semicircle",
    "arcsine",
    "semicircle_mass",
    "matrix_semicircle_mass",
    "matrix_conjugated",
]


def load_shipped(name: str) -> MatrixMeasure:
    text = (SPECS_DIR / f"{name}.json").read_text()
    return specio.build_measure(specio.parse_measure_spec(text))


@pytest.fixture(scope="session")
def shipped_measures() -> dict[str, MatrixMeasure]:
    return {name: load_shipped(name) for name in SHIPPED}


@pytest.fixture(scope="session")
def semicircle_measure() -> MatrixMeasure:
    return make_measure(SemicircleDensity(1), quad_order=1024, normalize="strict")


@pytest.fixture(scope="session")
def mass_measure(shipped_measures) -> MatrixMeasure:
    return shipped_measures["semicircle_mass"]


@pytest.fixture(scope="session")
def mass_sequence(mass_measure) -> PolySequence:
    # n = 101 covers every test that reads degrees up to 100
    return stieltjes(mass_measure, 101)


def random_smooth_weight(rng: np.random.Generator, dim: int, node_count: int,
                         harmonics: int = 3, floor: float = 0.4) -> np.ndarray:
    """Hermitian PD trig-polynomial samples on the midpoint grid, symmetric
    under t -> -t so they define a valid band density."""
    from matszego.linalg import midpoint_nodes

    theta = midpoint_nodes(node_count)
    w = np.zeros((node_count, dim, dim), dtype=complex)
    for k in range(harmonics + 1):
        c = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
        c = 0.25 * (c + c.conj().T) / (k + 1.0)
        w += np.cos(k * theta)[:, None, None] * c
    w = 0.5 * (w + w.conj().transpose(0, 2, 1))
    lam_min = float(np.min(np.linalg.eigvalsh(w)))
    shift = max(0.0, -lam_min) + floor
    return w + shift * np.eye(dim)[None]
