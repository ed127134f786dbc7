from __future__ import annotations

import json
from pathlib import Path

import pytest

from mtdgame.attack_graph import dump_attack_graph
from mtdgame.catalog import dump_catalog
from mtdgame.game import GameConfig, build_game
from mtdgame.scenarios import paper_fixture

DATA = Path(__file__).resolve().parents[1] / "data"


@pytest.fixture
def paper():
    return paper_fixture()


@pytest.fixture
def paper_game(paper):
    g, cat = paper
    return build_game(g, cat, GameConfig())


@pytest.fixture
def paper_files(tmp_path, paper):
    g, cat = paper
    gp, cp = tmp_path / "graph.json", tmp_path / "catalog.json"
    dump_attack_graph(g, gp)
    dump_catalog(cat, cp)
    return gp, cp


def write_json(path: Path, payload) -> Path:
    path.write_text(json.dumps(payload), encoding="utf-8")
    return path
