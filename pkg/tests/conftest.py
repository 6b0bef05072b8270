import re
import time

import pytest

from triview.pipeline.dataset import load_dataset

SESSION_START = time.perf_counter()
_ACCEPTANCE: dict[int, tuple[str, str]] = {}
_CRITERION = re.compile(r"test_acceptance\.py::test_criterion_(\d+)")


def pytest_collection_modifyitems(items):
    # the suite-runtime criterion must observe every other test, so it runs last
    last = [i for i in items if i.name == "test_criterion_12_suite_runtime"]
    items[:] = [i for i in items if i not in last] + last


def pytest_runtest_logreport(report):
    match = _CRITERION.search(report.nodeid)
    if not match or report.when != "call" and report.passed:
        return
    detail = dict(report.user_properties).get("detail", "")
    outcome = "PASS" if report.passed else "FAIL"
    if report.when == "call" or outcome == "FAIL":
        _ACCEPTANCE[int(match.group(1))] = (outcome, detail)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_ACCEPTANCE):
        outcome, detail = _ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d}: {outcome}  {detail}")


@pytest.fixture(scope="session")
def corpus_records():
    return load_dataset("bundled:corpus")


@pytest.fixture(scope="session")
def corpus(corpus_records):
    return [r.source for r in corpus_records]


@pytest.fixture(scope="session")
def labeled_records():
    return load_dataset("bundled:labeled")


SAMPLE = """pragma solidity ^0.8.0;
// a comment
contract Sample is Base {
    event Paid(address indexed to, uint amount);
    struct Info { uint a; }
    mapping(address => uint256) public balances;
    uint256[] history;
    address owner;
    uint constant FEE = 3;

    modifier onlyOwner() { require(msg.sender == owner); _; }

    constructor() { owner = msg.sender; }

    function deposit(uint256 amount) public payable onlyOwner returns (bool ok) {
        require(amount > 0, "zero");
        uint256 fee = amount * FEE / 100;
        balances[msg.sender] += amount - fee;
        history.push(amount);
        for (uint i = 0; i < history.length; i++) {
            if (history[i] > 10 ** 18) { fee = fee + 1; } else if (i % 2 == 0) { fee -= 1; } else { continue; }
        }
        while (fee > 0) { fee--; }
        emit Paid(msg.sender, amount);
        (bool sent, ) = payable(owner).call{value: fee}("");
        ok = !(sent && -fee < 0) ? true : false;
        return ok;
    }

    function total() external view returns (uint256, bool) {
        return (history.length, history.length > 0);
    }
}
"""
