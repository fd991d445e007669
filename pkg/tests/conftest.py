import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from kgrex import KnowledgeGraph, load_path_types, load_triples

FIXTURES = Path(__file__).parent.parent / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def phones_graph() -> KnowledgeGraph:
    return load_triples(FIXTURES / "phones.tsv")


@pytest.fixture(scope="session")
def phones_paths(phones_graph):
    return load_path_types(FIXTURES / "phones.paths", phones_graph)


@pytest.fixture(scope="session")
def courses_graph() -> KnowledgeGraph:
    return load_triples(FIXTURES / "courses.tsv")


@pytest.fixture(scope="session")
def courses_paths(courses_graph):
    return load_path_types(FIXTURES / "courses.paths", courses_graph)
