from __future__ import annotations

import json

import pytest

from miboard.content import TextPack, load_text_pack
from miboard.core import engine
from miboard.core.types import GameConfig, GameState

ACCEPTANCE_RESULTS: dict[str, str] = {}


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance" in report.nodeid:
        name = report.nodeid.split("::")[-1].removeprefix("test_criterion_")
        ACCEPTANCE_RESULTS[name] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for name, outcome in ACCEPTANCE_RESULTS.items():
        label = "PASS" if outcome == "passed" else outcome.upper()
        terminalreporter.write_line(f"{label}: {name}")

PACK_DOC = {
    "title": "How Cells Divide",
    "sentences": [
        "Every living thing grows by making more cells.",
        "A cell copies its chromosomes before it splits, so each new cell gets a full set.",
        "The copied chromosomes line up along the middle of the cell and are pulled apart.",
        "If the copies are shared out unevenly, the new cells may not survive.",
        "Because of this checking, most cells divide without errors.",
    ],
    "targets": [
        {"sentence": 1, "strategy": "paraphrasing"},
        {"sentence": 2, "strategy": "bridging"},
        {"sentence": 3, "strategy": "prediction"},
    ],
}


def make_pack(doc: dict | None = None) -> TextPack:
    return load_text_pack(json.dumps(doc or PACK_DOC))


def make_roster(n: int) -> list[tuple[str, str]]:
    return [(f"p{i}", f"Player {i}") for i in range(1, n + 1)]


def make_game(n: int = 4, seed: int = 42, **config_kwargs) -> GameState:
    config = GameConfig(**config_kwargs)
    state, _events = engine.new_game(config, make_pack(), make_roster(n), seed)
    return state


@pytest.fixture
def pack() -> TextPack:
    return make_pack()


@pytest.fixture
def game() -> GameState:
    return make_game()
