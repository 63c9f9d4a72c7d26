import pytest

from sevlab.bdi import build_lexicon, default_bands, load_questionnaire
from sevlab.corpus import CleanDocument, StopList, load_stoplist


@pytest.fixture(scope="session")
def stops_en() -> StopList:
    return load_stoplist("en")


@pytest.fixture(scope="session")
def questionnaire_items():
    _, items = load_questionnaire()
    return items


@pytest.fixture(scope="session")
def lexicon_en(questionnaire_items, stops_en):
    return build_lexicon(questionnaire_items, stops_en)


@pytest.fixture(scope="session")
def bands():
    return default_bands()


def make_doc(text: str, doc_id: str = "d1", language: str = "en") -> CleanDocument:
    return CleanDocument(
        id=doc_id, language=language, text=text, token_count=len(text.split())
    )
