import random
import shutil
import sys
from importlib import resources
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

from cdsbench.corpus_io import Document  # noqa: E402

MINICORPUS = Path(str(resources.files("cdsbench.data").joinpath("minicorpus")))

WORDS = ("sepsis fever cough pain chest heart attack infection lung blood pressure stroke brain "
         "insulin glucose kidney liver rash neck headache trauma fracture patient").split()


@pytest.fixture
def minicorpus(tmp_path):
    """A writable copy of the bundled mini-corpus."""
    dest = tmp_path / "minicorpus"
    shutil.copytree(MINICORPUS, dest)
    return dest


def random_docs(rng, n_docs, vocab=WORDS, max_len=12):
    docs = []
    for i in range(n_docs):
        def text(lo, hi):
            return " ".join(rng.choice(vocab) for _ in range(rng.randint(lo, hi)))

        docs.append(Document(
            doc_id=f"D{i:04d}",
            title=text(0, 4),
            abstract_text=text(0, max_len),
            body=text(0, max_len * 2),
            mesh_keywords=tuple(rng.sample(vocab, rng.randint(0, 2))),
            concept_ids=tuple(sorted(set(f"C{rng.randint(1, 9)}" for _ in range(rng.randint(0, 3))))),
        ))
    return docs


@pytest.fixture
def rng():
    return random.Random(1234)
