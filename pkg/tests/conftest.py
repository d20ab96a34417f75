import pytest

from jrcsim import ScenarioConfig, build_scenario

# fixed small-instance corpus shared by the oracle and theorem checks
CORPUS_SEEDS = tuple(range(20))


def corpus_size(seed: int) -> int:
    return (2, 3, 4)[seed % 3]


def corpus_scenario(seed: int):
    return build_scenario(ScenarioConfig(num_vehicles=corpus_size(seed)), seed=seed)


ACCEPTANCE_LINES: list[str] = []


def record(criterion: int, ok: bool, detail: str):
    line = f"criterion {criterion}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


@pytest.fixture
def acceptance_record():
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance gate")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
