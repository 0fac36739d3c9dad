import pytest

from activity_sos.components.model_parser import load_model
from support import model_path


@pytest.fixture
def fork():
    return load_model(model_path("fork"))


@pytest.fixture
def compete():
    return load_model(model_path("compete"))


@pytest.fixture(autouse=True)
def _artifacts_in_tmp(tmp_path, monkeypatch):
    # components write under ./Artifacts by default
    monkeypatch.chdir(tmp_path)
