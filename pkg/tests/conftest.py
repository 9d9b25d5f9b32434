"""Shared fixtures and hypothesis strategies."""

import json

import numpy as np
import pytest
from hypothesis import strategies as st
from sympy.polys.domains import QQ

from core.models import ModelDocument, ModelOptions
from services.codec import form_rows, metric_to_document, operator_to_entries
from services.frame_normalizer import constant_metric, exponents_up_to
from services.jetcalc import Jet
from services.realizer import ChristoffelField
from services.tensor_algebra import (
    AlgebraicCurvatureOperator,
    BilinearForm,
    InnerProduct,
    index_range,
)

small_rationals = st.fractions(min_value=-3, max_value=3, max_denominator=4)


@st.composite
def jets(draw, dim=3, degree_cap=3, max_terms=6, unit=False):
    """Random jet; unit=True pins the constant term to 1."""
    monomials = exponents_up_to(dim, degree_cap)
    chosen = draw(st.lists(st.sampled_from(monomials), max_size=max_terms, unique=True))
    terms = {exponents: draw(small_rationals) for exponents in chosen}
    if unit:
        terms[(0,) * dim] = 1
    return Jet.from_terms(dim, degree_cap, terms)


def random_christoffel(seed, dim=3, degree_cap=3, density=0.3):
    """Torsion-free field with sparse random coefficients k/2, |k| <= 2."""
    rng = np.random.default_rng(seed)
    monomials = exponents_up_to(dim, degree_cap)
    entries = {}
    for i, j, k in index_range(dim, 3):
        if j < i:
            continue
        terms = {}
        for exponents in monomials:
            if rng.random() < density:
                value = int(rng.integers(-2, 3))
                if value:
                    terms[exponents] = QQ(value, 2)
        jet = Jet.from_terms(dim, degree_cap, terms)
        entries[(i, j, k)] = jet
        entries[(j, i, k)] = jet
    return ChristoffelField(dim, degree_cap, entries)


def random_symmetric_theta(seed, dim=3, degree_cap=5, density=0.2):
    rng = np.random.default_rng(seed)
    monomials = exponents_up_to(dim, degree_cap)
    entries = {}
    for i, j in index_range(dim, 2):
        if j < i:
            continue
        terms = {}
        for exponents in monomials:
            if rng.random() < density:
                value = int(rng.integers(-3, 4))
                if value:
                    terms[exponents] = value
        jet = Jet.from_terms(dim, degree_cap, terms)
        entries[(i, j)] = jet
        entries[(j, i)] = jet
    return BilinearForm(dim, entries, Jet.zero(dim, degree_cap))


@pytest.fixture
def single_component_operator():
    """m = 3 operator with A_121^2 = 1 and A_211^2 = -1 only."""
    return AlgebraicCurvatureOperator(3, {(1, 2, 1, 2): 1, (2, 1, 1, 2): -1})


@pytest.fixture
def flat_metric():
    return constant_metric((0, 3), 0)


@pytest.fixture
def run_config(tmp_path):
    return {
        "run_root": tmp_path / "runs",
        "default_order": 4,
        "sample_radius": QQ(1, 2),
        "fd_step": QQ(1, 100),
    }


def model_payload(operator, signature=(0, 3), metric=None, order=None):
    """Model document dict; metric defaults to the constant diag(eps)."""
    if metric is None:
        metric_part = form_rows(InnerProduct.normalized(signature).form)
    else:
        metric_part = metric_to_document(metric)
    return ModelDocument(
        dim=operator.dim,
        signature=list(signature),
        metric=metric_part,
        operator=operator_to_entries(operator),
        options=ModelOptions(order=order),
    ).model_dump()


def write_model(path, payload):
    path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    return path
