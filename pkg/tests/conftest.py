import pytest

from lf2hh.bench import corpus_text, load_corpus


@pytest.fixture(scope="session")
def property_suites():
    """One shared run of the randomized suites; both the per-suite tests
    and the aggregate acceptance check read from it."""
    import suites

    return suites.run_all()


@pytest.fixture(scope="session")
def append_sig():
    return load_corpus("append")


@pytest.fixture(scope="session")
def reverse_sig():
    return load_corpus("reverse")


@pytest.fixture(scope="session")
def miniml_sig():
    return load_corpus("miniml")


@pytest.fixture(scope="session")
def num_sig():
    return load_corpus("num")


@pytest.fixture(scope="session")
def append_text():
    return corpus_text("append")
