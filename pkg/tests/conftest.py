import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from cscv.corpus import CORPUS_DIR  # noqa: E402
from cscv.frontend import parse_contract, parse_property, parse_snapshot  # noqa: E402
from cscv.harness import load_manifest  # noqa: E402
from cscv.pipeline import load_problem  # noqa: E402

CONTRACTS = CORPUS_DIR / "contracts"

VAULT_SNAPSHOT = '{"block":0,"state":{"total":5,"balances":{"0xA":5}},"actors":["0xA","0xB"],"attacker":"0xA"}'


def corpus_source(name: str) -> str:
    return (CONTRACTS / name).read_text()


@pytest.fixture(scope="session")
def vault():
    return parse_contract(corpus_source("vault.mcl"))


@pytest.fixture(scope="session")
def vault_patched():
    return parse_contract(corpus_source("vault_patched.mcl"))


@pytest.fixture(scope="session")
def vault_prop(vault):
    return parse_property("always total >= 0", vault)


@pytest.fixture(scope="session")
def vault_snapshot(vault):
    return parse_snapshot(VAULT_SNAPSHOT, vault)


@pytest.fixture(scope="session")
def entries():
    return load_manifest()


@pytest.fixture(scope="session")
def problems(entries):
    return {e.id: load_problem(e.contract, e.property, e.snapshot) for e in entries}


@pytest.fixture(scope="session")
def oracle_results(problems):
    """Brute-force oracle per corpus entry at the stated bounds, computed once."""
    import oracle

    return {k: oracle.search(p.contract, p.prop, p.snapshot) for k, p in problems.items()}


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
