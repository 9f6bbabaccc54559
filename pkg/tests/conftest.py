import random
from collections import defaultdict

import pytest

from gatedstore.bft import messages as M
from gatedstore.bft.config import ReplicaConfig
from gatedstore.bft.replica import Replica, Tx, owner_mac
from gatedstore.crypto import te_setup
from gatedstore.crypto.aead import sha256
from gatedstore.model import AccessType, CipherBundle
from gatedstore.sim.adversary import AdversarySpec
from gatedstore.sim.network import SimNetwork

OWNER_KEY = b"\x11" * 32


class AckCollector:
    """Stands in for a data owner: counts per-write acks by replica."""

    def __init__(self):
        self.acks = defaultdict(set)
        self.nacks = defaultdict(set)
        self.reads = defaultdict(list)

    def on_message(self, sender, msg, api):
        if isinstance(msg, M.WriteAck):
            (self.acks if msg.ok else self.nacks)[msg.h].add(sender)
        elif isinstance(msg, M.ReadResponse):
            self.reads[msg.h].append((sender, msg))


def make_tx(i: int, origin: str = "owner-0", key: bytes = OWNER_KEY) -> Tx:
    sigma = CipherBundle(
        tag=AccessType.ABE, c_m=b"payload-%d" % i, x=b"wrap-%d" % i
    ).encode()
    h = sha256(b"tx-%d" % i)
    return Tx(h=h, sigma=sigma, origin=origin, mac=owner_mac(key, h, sigma))


def build_cluster(
    seed: int = 1,
    f: int = 1,
    batch_cap: int = 40,
    adversary: str = "none",
    delay_max: int = 8,
    te_keys=None,
    owner_names: tuple[str, ...] = ("owner-0",),
    trace_payloads: bool = True,
):
    n = 3 * f + 1
    spec = AdversarySpec.parse(adversary)
    spec.validate(n, f)
    net = SimNetwork(seed=seed, adversary=spec, delay_max=delay_max, trace_payloads=trace_payloads)
    if te_keys is None:
        te_keys = te_setup(n, f + 1, random.Random(seed ^ 0x7E))
    replicas = []
    mac_keys = {name: OWNER_KEY for name in owner_names}
    for i in range(n):
        rep = Replica(
            ReplicaConfig(n=n, f=f, replica_id=i, batch_cap=batch_cap),
            coin=net.coin,
            te_share=te_keys.shares[i],
            owner_mac_keys=mac_keys,
        )
        net.add_node(rep.node_name(), rep)
        replicas.append(rep)
    collector = AckCollector()
    for name in owner_names:
        net.add_node(name, collector)
    return net, replicas, collector


def submit(net, tx: Tx, to_replica: int, sender: str = "owner-0"):
    net.apis[sender].send(
        f"replica-{to_replica}",
        M.SubmitWrite(h=tx.h, sigma=tx.sigma, origin=tx.origin, mac=tx.mac),
    )


@pytest.fixture
def cluster():
    return build_cluster()
