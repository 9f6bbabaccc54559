"""Scenario construction and the end-to-end run loop.

``build_system`` performs the one-time synchronous setup phase (key
generation, registration, node wiring) and returns a fully connected
simulated deployment.  ``run_scenario`` drives a configured workload under
the configured adversary, evaluates the reliability property suite on the
trace, and returns metrics plus verdicts.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass

from ..bft import messages as M
from ..bft.config import ReplicaConfig
from ..bft.replica import Replica
from ..client import (
    OwnerNode,
    ReadDone,
    RequesterCreds,
    RequesterNode,
    StartRead,
    StartWrite,
    WriteDone,
)
from ..errors import GatedStoreError
from ..kgc import Kgc
from ..ledger import LedgerNode
from ..model import AccessType
from ..verifier import Verifier
from .adversary import AdversarySpec
from .network import SimNetwork, derive_rng
from . import properties as props
from . import metrics as metrics_mod

ACCESS_BY_NAME = {"abe": AccessType.ABE, "be": AccessType.BE, "te": AccessType.TE}


@dataclass
class SimConfig:
    seed: int = 1
    n: int = 4
    f: int = 1
    batch_cap: int = 40  # B
    client_count: int = 8
    data_size: int = 250
    access: str = "te"
    adversary: str = "none"
    writes: int = 1000  # K
    reads: str = "honest"  # none | honest | honest+denied
    read_fraction: float = 1.0
    delay_max: int = 8
    transport: str = "in-process"
    owners: int = 1
    abe_formula: str = "Role_User AND Tier_1"
    trace_payloads: bool = True
    max_steps: int = 20_000_000

    def validate(self) -> None:
        if self.access not in ACCESS_BY_NAME:
            raise GatedStoreError(f"access must be one of {sorted(ACCESS_BY_NAME)}")
        if self.n != 3 * self.f + 1:
            raise GatedStoreError("replica count must be 3f+1")
        if self.client_count < 2:
            raise GatedStoreError("need at least two requesters (one is the denied probe)")
        if self.reads not in ("none", "honest", "honest+denied"):
            raise GatedStoreError("reads must be none | honest | honest+denied")

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, raw: str) -> "SimConfig":
        return cls(**json.loads(raw))


class Driver:
    """Workload orchestrator: launches writes, launches a read when a write
    lands, tracks expected outcomes for the property checks."""

    def __init__(self, config: SimConfig, plan: list[tuple[str, bytes, AccessType, object]]):
        self.config = config
        self.plan = plan  # (owner, m, at, attribute_list)
        self.writes_done: dict[str, bytes] = {}  # txid -> h
        self.m_by_h: dict[bytes, bytes] = {}
        self.read_outcomes: dict[tuple[str, str], str] = {}
        self.expected: dict[tuple[str, str], str] = {}
        self.refused_writes: int = 0
        self._read_rng = None
        self._reads_launched = 0

    def on_message(self, sender: str, msg: M.Message, api) -> None:
        if isinstance(msg, M.Timer) and msg.token == "kickoff":
            for owner, m, at, al in self.plan:
                self.m_by_h[_sha256(m)] = m
                api.send(owner, StartWrite(m=m, at=at, attribute_list=al))
        elif isinstance(msg, WriteDone):
            if not msg.txid:
                self.refused_writes += 1
                return
            self.writes_done[msg.txid] = msg.h
            self._launch_reads(msg.txid, api)
        elif isinstance(msg, ReadDone):
            self.read_outcomes[(msg.requester, msg.txid)] = msg.status

    def _launch_reads(self, txid: str, api) -> None:
        cfg = self.config
        if cfg.reads == "none":
            return
        if self._read_rng is None:
            self._read_rng = api.rng
        if self._read_rng.random() >= cfg.read_fraction:
            return
        honest = self._read_rng.randrange(1, cfg.client_count)
        self.expected[(f"requester-{honest}", txid)] = "done"
        api.send(f"requester-{honest}", StartRead(txid=txid))
        if cfg.reads == "honest+denied":
            self.expected[(f"requester-0", txid)] = "access_denied"
            api.send("requester-0", StartRead(txid=txid))


def _sha256(m: bytes) -> bytes:
    from ..crypto.aead import sha256

    return sha256(m)


@dataclass
class System:
    config: SimConfig
    net: SimNetwork
    kgc: Kgc
    ledger: LedgerNode
    verifier: Verifier
    replicas: list[Replica]
    owners: dict[str, OwnerNode]
    requesters: dict[str, RequesterNode]
    driver: Driver


def default_attribute_list(config: SimConfig, at: AccessType):
    """The owner-side attribute list from which the policy derives.

    requester-0 is always the non-satisfying probe: unsatisfying attributes
    for ABE, the revoked leaf for BE, an unauthorized identity for TE.
    """
    if at == AccessType.ABE:
        return config.abe_formula
    if at == AccessType.BE:
        return {0}
    return {f"requester-{i}" for i in range(1, config.client_count)}


def build_system(config: SimConfig, plan=None) -> System:
    config.validate()
    net = SimNetwork(
        seed=config.seed,
        adversary=AdversarySpec.parse(config.adversary),
        delay_max=config.delay_max,
        trace_payloads=config.trace_payloads,
    )
    net.adversary.spec.validate(config.n, config.f)

    setup_rng = derive_rng(config.seed, "setup")
    kgc = Kgc(setup_rng, n=config.n, f=config.f, be_group_size=config.client_count)

    verifier_keys = kgc.register("verifier", "verifier")
    verifier = Verifier(verifier_keys["verifier_sk"])

    replica_grants = [
        kgc.register(f"replica-{i}", "replica", replica_id=i) for i in range(config.n)
    ]

    owner_names = [f"owner-{i}" for i in range(config.owners)]
    owner_grants = {name: kgc.register(name, "owner") for name in owner_names}

    requester_nodes: dict[str, RequesterNode] = {}
    for i in range(config.client_count):
        name = f"requester-{i}"
        attrs = (
            {"Role_User"}
            if i == 0
            else {"Role_User", "Tier_1"}
        )
        grant = kgc.register(name, "requester", abe_attrs=attrs, be_leaf=i)
        creds = RequesterCreds(
            abe_attrs=frozenset(attrs),
            be_leaf=i,
            be_leaf_keys=grant.get("be_leaf_keys", []),
            te_vk=grant["te_vk"],
        )
        requester_nodes[name] = RequesterNode(
            name, config.n, config.f, creds, grant["verifier_pk"], driver="driver"
        )

    ledger = LedgerNode()
    for name in owner_names:
        ledger.chain.register_owner(name)

    replicas = []
    for i in range(config.n):
        rep = Replica(
            ReplicaConfig(n=config.n, f=config.f, replica_id=i, batch_cap=config.batch_cap),
            coin=net.coin,
            te_share=replica_grants[i]["te_share"],
            owner_mac_keys=dict(kgc.owner_mac_keys),
        )
        replicas.append(rep)
        net.add_node(rep.node_name(), rep)

    owner_nodes: dict[str, OwnerNode] = {}
    for name in owner_names:
        grant = owner_grants[name]
        owner_nodes[name] = OwnerNode(
            name,
            config.n,
            config.f,
            mac_key=grant["mac_key"],
            write_keys_abe=grant["abe_pk"],
            be_tree=grant["be_tree"],
            te_pk=grant["te_pk"],
            verifier_pk=grant["verifier_pk"],
            driver="driver",
        )
        net.add_node(name, owner_nodes[name])

    for name, node in requester_nodes.items():
        net.add_node(name, node)
    net.add_node("ledger", ledger)
    net.add_node("verifier", verifier)
    net.add_node("kgc", kgc)

    if plan is None:
        at = ACCESS_BY_NAME[config.access]
        data_rng = derive_rng(config.seed, "payloads")
        plan = []
        for i in range(config.writes):
            owner = owner_names[i % len(owner_names)]
            m = data_rng.randbytes(config.data_size)
            plan.append((owner, m, at, default_attribute_list(config, at)))
    driver = Driver(config, plan)
    net.add_node("driver", driver)
    net.apis["driver"].set_timer(1, M.Timer(token="kickoff"))
    return System(
        config=config,
        net=net,
        kgc=kgc,
        ledger=ledger,
        verifier=verifier,
        replicas=replicas,
        owners=owner_nodes,
        requesters=requester_nodes,
        driver=driver,
    )


@dataclass
class RunResult:
    config: SimConfig
    trace_hash: str
    verdicts: list
    metrics: dict
    steps: int
    refused_writes: int

    def all_passed(self) -> bool:
        return all(v.passed for v in self.verdicts)


def run_scenario(config: SimConfig, plan=None) -> tuple[System, RunResult]:
    system = build_system(config, plan=plan)
    system.net.run(max_steps=config.max_steps)
    verdicts = props.evaluate(system)
    metrics = metrics_mod.collect(system)
    result = RunResult(
        config=config,
        trace_hash=system.net.trace_hash(),
        verdicts=verdicts,
        metrics=metrics,
        steps=system.net.steps,
        refused_writes=system.driver.refused_writes,
    )
    return system, result
