import pytest

from plsum import ConceptMatcher, load_toy_lexicon


@pytest.fixture(scope="session")
def toy_lexicon():
    return load_toy_lexicon()


@pytest.fixture(scope="session")
def extractor(toy_lexicon):
    """Shared extraction matcher: token Jaccard at threshold 0.7."""
    return ConceptMatcher.for_extraction(toy_lexicon)


@pytest.fixture(scope="session")
def exact_matcher(toy_lexicon):
    """Shared slot-discovery matcher: exact matching at threshold 1.0."""
    return ConceptMatcher.for_augmentation(toy_lexicon)
