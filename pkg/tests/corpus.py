"""
Seeded random models: acyclic, well-formed, at most `max_nodes` nodes.

Without `decisions` they are control-flow only. With it a Decision may be
drawn; it routes a control token by the Int an Action companion sends
along its decision-input flow, and its outgoing edges carry random guards.
"""
from typing import Dict, List, Set, Tuple

import numpy as np
import yaml

from activity_sos.components.model_parser import parse_model
from activity_sos.entity.model_entity import Model

KINDS = ["Action", "Fork", "Join", "Merge", "FlowFinalNode", "ActivityFinalNode"]
SINKS = ["Action", "FlowFinalNode", "ActivityFinalNode"]
FINALS = {"FlowFinalNode", "ActivityFinalNode"}
NEEDS_OUTPUT = {"InitialNode", "Fork", "Join", "Merge", "Decision"}
GUARDS = ["x > {}", "x <= {}", "x == {}"]


def _guards(rng: np.random.Generator, count: int) -> List[str]:
    guards = [GUARDS[int(rng.integers(len(GUARDS)))].format(int(rng.integers(0, 4))) for _ in range(count)]
    if count > 1 and rng.integers(2):
        guards[-1] = "else"
    return guards


def random_document(seed: int, max_nodes: int = 6, decisions: bool = False) -> str:
    rng = np.random.default_rng(seed)
    count = int(rng.integers(2, max_nodes + 1))
    ids = ["init"] + [f"n{i}" for i in range(1, count)]
    kinds = {"init": "InitialNode"}
    for i, node in enumerate(ids[1:], start=1):
        pool = SINKS if i == count - 1 else KINDS + (["Decision"] if decisions else [])
        kinds[node] = pool[int(rng.integers(len(pool)))]

    edges: Set[Tuple[str, str]] = set()
    for i in range(1, count):
        sources = [ids[j] for j in range(i) if kinds[ids[j]] not in FINALS]
        picks = 1 if len(sources) == 1 else int(rng.integers(1, 3))
        for j in rng.choice(len(sources), size=picks, replace=False):
            edges.add((sources[int(j)], ids[i]))
    for i, node in enumerate(ids):
        if kinds[node] in NEEDS_OUTPUT and not any(src == node for src, _ in edges):
            later = ids[i + 1:]
            edges.add((node, later[int(rng.integers(len(later)))]))

    nodes: List[Dict] = [{"id": n, "kind": kinds[n]} for n in ids]
    rendered: List[Dict] = []
    behaviors: Dict[str, str] = {}
    routers = [n for n in ids if kinds[n] == "Decision"]
    for source, target in sorted(edges):
        rendered.append({"source": source, "target": f"{target}v" if target in routers else target})
    for node in routers:
        value = int(rng.integers(0, 4))
        behaviors[f"const{value}"] = f"const:{value}"
        companion = f"{node}v"
        nodes.append({"id": companion, "kind": "Action", "behavior": f"const{value}", "outputs": [{"name": "out", "type": "Int"}]})
        next(n for n in nodes if n["id"] == node).update({"d_flow": "df", "inputs": [{"name": "df", "type": "Int"}]})
        rendered.append({"source": companion, "target": node})
        rendered.append({"source": f"{companion}.out", "target": f"{node}.df"})
        outgoing = [e for e in rendered if e["source"] == node]
        for edge, guard in zip(outgoing, _guards(rng, len(outgoing))):
            edge["guard"] = guard

    document: Dict = {"activities": [{"name": "Main", "nodes": nodes, "edges": rendered}]}
    if behaviors:
        document["behaviors"] = behaviors
    return yaml.safe_dump(document, sort_keys=False)


def random_models(count: int, max_nodes: int = 6, first_seed: int = 0, decisions: bool = False) -> List[Model]:
    return [
        parse_model(random_document(seed, max_nodes, decisions)) for seed in range(first_seed, first_seed + count)
    ]
