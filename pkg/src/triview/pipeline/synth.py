"""Template-based synthetic contracts.

Two families with disjoint identifier vocabularies:

* ponzi-like (label 1): payout chains where later deposits pay earlier
  investors (array-indexed payout queues, referral trees, round doubling);
* benign (label 0): tokens, escrows, ballots and registries.

Every contract is drawn from a seeded generator, so the bundled datasets can
be regenerated byte-for-byte.
"""

from __future__ import annotations

import json
from typing import Callable

import numpy as np

__all__ = ["generate", "generate_records", "write_jsonl", "PONZI_TEMPLATES", "BENIGN_TEMPLATES"]

PONZI_WORDS = {
    "queue": ["investors", "participants", "members", "depositors", "entrants"],
    "amount": ["deposits", "invested", "stakes", "contributions", "shares"],
    "cursor": ["payoutIndex", "nextPayee", "headIndex", "payoutCursor", "turn"],
    "payout": ["payout", "reward", "dividend", "returnAmount", "bonus"],
    "ref": ["referrer", "upline", "sponsor", "inviter", "introducer"],
    "mult": ["multiplier", "factor", "growthRate", "boost", "leverage"],
    "round": ["round", "cycle", "stage", "wave", "epoch"],
    "name": ["Doubler", "Pyramid", "Multiplier", "HyipFund", "GrowthClub", "RichQueue"],
}

BENIGN_WORDS = {
    "bal": ["balances", "holdings", "ledger", "accounts", "credit"],
    "sup": ["totalSupply", "supplyCap", "issued", "circulating", "minted"],
    "admin": ["owner", "admin", "governor", "controller", "manager"],
    "item": ["proposals", "records", "entries", "listings", "tickets"],
    "count": ["voteCount", "tally", "counter", "score", "weight"],
    "seller": ["seller", "vendor", "provider", "merchant", "supplier"],
    "buyer": ["buyer", "client", "customer", "purchaser", "recipient"],
    "name": ["Token", "Escrow", "Ballot", "Registry", "Vault", "Storage"],
}


def _pick(rng, words, key):
    return words[key][int(rng.integers(len(words[key])))]


def _ponzi_queue(rng) -> str:
    w = {k: _pick(rng, PONZI_WORDS, k) for k in PONZI_WORDS}
    pct = int(rng.choice([110, 120, 150, 200]))
    min_dep = int(rng.choice([1, 2, 5]))
    extra = ""
    if rng.random() < 0.5:
        extra = f"""
    function queueLength() public view returns (uint256) {{
        return {w['queue']}.length - {w['cursor']};
    }}"""
    return f"""pragma solidity ^0.8.0;

contract {w['name']}{int(rng.integers(100))} {{
    address[] {w['queue']};
    mapping(address => uint256) {w['amount']};
    uint256 {w['cursor']};
    uint256 {w['mult']} = {pct};

    function join() public payable {{
        require(msg.value >= {min_dep} ether);
        {w['queue']}.push(msg.sender);
        {w['amount']}[msg.sender] += msg.value;
        while ({w['cursor']} < {w['queue']}.length) {{
            address head = {w['queue']}[{w['cursor']}];
            uint256 {w['payout']} = {w['amount']}[head] * {w['mult']} / 100;
            if (address(this).balance < {w['payout']}) {{
                break;
            }}
            {w['amount']}[head] = 0;
            {w['cursor']} += 1;
            payable(head).transfer({w['payout']});
        }}
    }}{extra}

    receive() external payable {{
        join();
    }}
}}
"""


def _ponzi_referral(rng) -> str:
    w = {k: _pick(rng, PONZI_WORDS, k) for k in PONZI_WORDS}
    levels = int(rng.integers(2, 5))
    rate = int(rng.choice([5, 10, 15]))
    return f"""pragma solidity ^0.8.0;

contract {w['name']}{int(rng.integers(100))} {{
    mapping(address => address) {w['ref']};
    mapping(address => uint256) {w['amount']};
    uint256 {w['mult']} = {rate};

    function enter(address {w['ref']}Addr) public payable {{
        require(msg.value > 0);
        if ({w['ref']}[msg.sender] == address(0) && {w['ref']}Addr != msg.sender) {{
            {w['ref']}[msg.sender] = {w['ref']}Addr;
        }}
        {w['amount']}[msg.sender] += msg.value;
        address current = {w['ref']}[msg.sender];
        for (uint256 level = 0; level < {levels}; level++) {{
            if (current == address(0)) {{
                break;
            }}
            uint256 {w['payout']} = msg.value * {w['mult']} / 100;
            payable(current).transfer({w['payout']});
            current = {w['ref']}[current];
        }}
    }}

    function {w['amount']}Of(address who) public view returns (uint256) {{
        return {w['amount']}[who];
    }}
}}
"""


def _ponzi_round(rng) -> str:
    w = {k: _pick(rng, PONZI_WORDS, k) for k in PONZI_WORDS}
    goal = int(rng.choice([10, 20, 50]))
    return f"""pragma solidity ^0.8.0;

contract {w['name']}{int(rng.integers(100))} {{
    address[] {w['queue']};
    uint256 {w['round']};
    uint256 pot;

    function invest() public payable {{
        require(msg.value == 1 ether);
        {w['queue']}.push(msg.sender);
        pot += msg.value;
        if ({w['queue']}.length % {goal} == 0) {{
            uint256 {w['payout']} = pot / 2;
            uint256 {w['cursor']} = {w['queue']}.length - {goal};
            pot -= {w['payout']};
            {w['round']} += 1;
            payable({w['queue']}[{w['cursor']}]).transfer({w['payout']});
        }}
    }}

    function current{w['round'].capitalize()}() public view returns (uint256) {{
        return {w['round']};
    }}
}}
"""


def _benign_token(rng) -> str:
    w = {k: _pick(rng, BENIGN_WORDS, k) for k in BENIGN_WORDS}
    supply = int(rng.choice([1000, 10000, 1000000]))
    extra = ""
    if rng.random() < 0.5:
        extra = f"""

    function burn(uint256 value) public {{
        require({w['bal']}[msg.sender] >= value);
        {w['bal']}[msg.sender] -= value;
        {w['sup']} -= value;
    }}"""
    return f"""pragma solidity ^0.8.0;

contract {w['name']}{int(rng.integers(100))} {{
    mapping(address => uint256) {w['bal']};
    uint256 {w['sup']};
    address {w['admin']};

    constructor() {{
        {w['admin']} = msg.sender;
        {w['sup']} = {supply};
        {w['bal']}[msg.sender] = {w['sup']};
    }}

    function send(address to, uint256 value) public returns (bool) {{
        require({w['bal']}[msg.sender] >= value);
        {w['bal']}[msg.sender] -= value;
        {w['bal']}[to] += value;
        return true;
    }}

    function balanceOf(address who) public view returns (uint256) {{
        return {w['bal']}[who];
    }}{extra}
}}
"""


def _benign_escrow(rng) -> str:
    w = {k: _pick(rng, BENIGN_WORDS, k) for k in BENIGN_WORDS}
    return f"""pragma solidity ^0.8.0;

contract {w['name']}{int(rng.integers(100))} {{
    address {w['seller']};
    address {w['buyer']};
    address {w['admin']};
    uint256 price;
    bool settled;

    constructor(address s, uint256 p) {{
        {w['admin']} = msg.sender;
        {w['seller']} = s;
        price = p;
    }}

    function fund() public payable {{
        require(msg.value == price);
        require({w['buyer']} == address(0));
        {w['buyer']} = msg.sender;
    }}

    function release() public {{
        require(msg.sender == {w['buyer']} || msg.sender == {w['admin']});
        require(!settled);
        settled = true;
        payable({w['seller']}).transfer(price);
    }}

    function refund() public {{
        require(msg.sender == {w['admin']});
        require(!settled);
        settled = true;
        payable({w['buyer']}).transfer(price);
    }}
}}
"""


def _benign_ballot(rng) -> str:
    w = {k: _pick(rng, BENIGN_WORDS, k) for k in BENIGN_WORDS}
    options = int(rng.integers(2, 6))
    return f"""pragma solidity ^0.8.0;

contract {w['name']}{int(rng.integers(100))} {{
    uint256[] {w['item']};
    mapping(address => bool) voted;
    address {w['admin']};

    constructor() {{
        {w['admin']} = msg.sender;
        for (uint256 i = 0; i < {options}; i++) {{
            {w['item']}.push(0);
        }}
    }}

    function vote(uint256 choice) public {{
        require(!voted[msg.sender]);
        require(choice < {w['item']}.length);
        voted[msg.sender] = true;
        {w['item']}[choice] += 1;
    }}

    function winner() public view returns (uint256) {{
        uint256 best = 0;
        uint256 {w['count']} = 0;
        for (uint256 i = 0; i < {w['item']}.length; i++) {{
            if ({w['item']}[i] > {w['count']}) {{
                {w['count']} = {w['item']}[i];
                best = i;
            }}
        }}
        return best;
    }}
}}
"""


PONZI_TEMPLATES: list[Callable] = [_ponzi_queue, _ponzi_referral, _ponzi_round]
BENIGN_TEMPLATES: list[Callable] = [_benign_token, _benign_escrow, _benign_ballot]


def generate(rng: np.random.Generator, label: int) -> str:
    templates = PONZI_TEMPLATES if label == 1 else BENIGN_TEMPLATES
    return templates[int(rng.integers(len(templates)))](rng)


def generate_records(n: int, seed: int, ponzi_fraction: float = 0.5) -> list[dict]:
    """``n`` records with ids ``synth-0000``...; labels are shuffled, exactly round(n * fraction) ponzi."""
    rng = np.random.default_rng(seed)
    n_ponzi = int(round(n * ponzi_fraction))
    labels = np.array([1] * n_ponzi + [0] * (n - n_ponzi))
    rng.shuffle(labels)
    return [
        {"idx": f"synth-{i:04d}", "source": generate(rng, int(y)), "label": int(y)}
        for i, y in enumerate(labels)
    ]


def write_jsonl(records: list[dict], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")
