"""Helpers shared by the test modules."""
import os

from activity_sos.components.explorer import explore
from activity_sos.components.model_parser import load_model
from activity_sos.components.profiles import parse_profile_spec

MODELS_DIR = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "models")


def model_path(name: str) -> str:
    return os.path.join(MODELS_DIR, f"{name}.yaml")


def explored(name: str, profile: str = "reference", mode: str = "reduced", timing=None, jobs: int = 1):
    model = load_model(model_path(name))
    return explore(model, parse_profile_spec(profile, timing, model), mode=mode, jobs=jobs)


def label_texts(structure):
    return {str(label) for _, label, _ in structure.transitions}


def linear_labels(structure):
    """Labels along the only path from the initial state; fails on branching."""
    adjacency = structure.adjacency()
    current, labels = structure.initial, []
    while adjacency[current]:
        assert len(adjacency[current]) == 1, f"state {current} branches"
        label, current = adjacency[current][0]
        labels.append(str(label))
    return labels
