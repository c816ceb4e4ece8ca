import pytest

from crisiswatch.config import ServiceConfig
from crisiswatch.enrichment import CredibilityModel, Gazetteer
from crisiswatch.events import Resources
from crisiswatch.text import load_stopwords


@pytest.fixture(scope="session")
def stopwords():
    return load_stopwords()


@pytest.fixture()
def gazetteer():
    g = Gazetteer()
    g.add("rome", "Rome", "place")
    g.add("roma", "Rome", "place")
    g.add("amatrice", "Amatrice", "place")
    g.add("new york", "New York", "place")
    g.add("york", "York", "place")
    g.add("red cross", "Red Cross", "organization")
    g.add("mayor", "Mayor", "person")
    return g


@pytest.fixture()
def sentiment_lexicon():
    return {"great": 0.8, "good": 0.7, "help": 0.4, "bad": -0.7, "terrible": -0.9}


@pytest.fixture()
def resources(stopwords, gazetteer, sentiment_lexicon):
    return Resources(
        stopwords=stopwords,
        gazetteer=gazetteer,
        sentiment_lexicon=sentiment_lexicon,
        credibility_model=CredibilityModel(),
        config=ServiceConfig(),
    )
