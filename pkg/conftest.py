# Shared fixtures: the invoice and banking corpora, parsed once per test session

from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

from events_file import parse_events
from tm_format import parse_tm
from tmuml_transformer import build_static_model, parse_bindings
from uml_parser import parse_class, parse_usecase

CORPUS = Path(__file__).parent / "corpus"

settings.register_profile("tmuml", max_examples=100, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("tmuml")


def corpus_text(name: str) -> str:
    return (CORPUS / name).read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def invoice_usecase():
    return parse_usecase(corpus_text("invoice.usecase"), "invoice.usecase")


@pytest.fixture(scope="session")
def invoice_classes():
    return parse_class(corpus_text("invoice.class"), "invoice.class")


@pytest.fixture(scope="session")
def invoice_bindings():
    return parse_bindings(corpus_text("invoice.bind"), "invoice.bind")


@pytest.fixture(scope="session")
def invoice_model(invoice_usecase, invoice_classes, invoice_bindings):
    return build_static_model(invoice_usecase, invoice_classes, invoice_bindings)


@pytest.fixture(scope="session")
def invoice_golden():
    return parse_tm(corpus_text("invoice_golden.tm"), "invoice_golden.tm")


@pytest.fixture(scope="session")
def invoice_events(invoice_golden):
    """(events, behavior graph) of the invoice events file over the golden model"""
    return parse_events(corpus_text("invoice.events"), invoice_golden, "invoice.events")


@pytest.fixture(scope="session")
def banking_usecase():
    return parse_usecase(corpus_text("banking.usecase"), "banking.usecase")
