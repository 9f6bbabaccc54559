"""Socket transport: every node runs in its own thread behind a TCP server
and exchanges length-prefixed wire frames.

This transport exists for demos and wall-clock benchmarks; the property
suite runs on the deterministic in-process scheduler.  Protocol, ledger,
verifier and key-center traffic all cross real sockets.  Workload
orchestration messages (start-write/start-read and their completions) stay
in-process between the driver and the client threads -- they are driver
plumbing, not protocol surface.
"""

from __future__ import annotations

import queue
import random
import socket
import threading
import time

from .bft import messages as M
from .bft import wire
from .errors import GatedStoreError


class SocketApi:
    def __init__(self, hub: "SocketHub", name: str, rng: random.Random):
        self._hub = hub
        self.name = name
        self.rng = rng

    @property
    def now(self) -> int:
        return int((time.monotonic() - self._hub.t0) * 1000)

    def send(self, dest: str, msg: M.Message) -> None:
        self._hub.send(self.name, dest, msg)

    def set_timer(self, delay: int, timer: M.Timer) -> None:
        # logical ticks map to milliseconds in wall-clock mode
        t = threading.Timer(delay / 1000.0, self._hub.local_put, args=(self.name, self.name, timer))
        t.daemon = True
        t.start()

    def trace(self, kind: str, **fields) -> None:
        self._hub.record(self.name, kind, fields)


class _NodeRunner:
    def __init__(self, hub: "SocketHub", name: str, node):
        self.hub = hub
        self.name = name
        self.node = node
        self.inbox: queue.Queue = queue.Queue()
        self.api = SocketApi(hub, name, random.Random(hash(name) & 0xFFFFFFFF))
        self.server = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        self.server.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        self.server.bind(("127.0.0.1", 0))
        self.server.listen(32)
        self.port = self.server.getsockname()[1]
        self._stop = threading.Event()
        self._threads: list[threading.Thread] = []

    def start(self) -> None:
        for target in (self._accept_loop, self._process_loop):
            t = threading.Thread(target=target, daemon=True)
            t.start()
            self._threads.append(t)

    def _accept_loop(self) -> None:
        self.server.settimeout(0.2)
        while not self._stop.is_set():
            try:
                conn, _ = self.server.accept()
            except socket.timeout:
                continue
            except OSError:
                return
            t = threading.Thread(target=self._reader, args=(conn,), daemon=True)
            t.start()
            self._threads.append(t)

    def _reader(self, conn: socket.socket) -> None:
        buf = b""
        conn.settimeout(0.2)
        while not self._stop.is_set():
            try:
                chunk = conn.recv(65536)
            except socket.timeout:
                continue
            except OSError:
                return
            if not chunk:
                return
            buf += chunk
            frames, buf = wire.read_frames(buf)
            for sender, msg in frames:
                self.inbox.put((sender, msg))

    def _process_loop(self) -> None:
        while not self._stop.is_set():
            try:
                sender, msg = self.inbox.get(timeout=0.2)
            except queue.Empty:
                continue
            try:
                self.node.on_message(sender, msg, self.api)
            except Exception as exc:  # surface, do not kill the thread silently
                self.hub.record(self.name, "node_error", {"error": repr(exc)})

    def stop(self) -> None:
        self._stop.set()
        try:
            self.server.close()
        except OSError:
            pass


class SocketHub:
    """Directory plus connection pool for a local socket deployment."""

    def __init__(self):
        self.runners: dict[str, _NodeRunner] = {}
        self._conns: dict[tuple[str, str], socket.socket] = {}
        self._lock = threading.Lock()
        self.trace: list[tuple[float, str, str, dict]] = []
        self.t0 = time.monotonic()

    def add_node(self, name: str, node) -> None:
        if name in self.runners:
            raise GatedStoreError(f"duplicate node {name}")
        runner = _NodeRunner(self, name, node)
        self.runners[name] = runner
        wire.register_sender(name, len(self.runners))

    def start(self) -> None:
        for runner in self.runners.values():
            runner.start()

    def local_put(self, sender: str, dest: str, msg: M.Message) -> None:
        self.runners[dest].inbox.put((sender, msg))

    def send(self, sender: str, dest: str, msg: M.Message) -> None:
        if dest not in self.runners:
            raise GatedStoreError(f"unknown node {dest}")
        if not msg.FIELDS and not isinstance(msg, M.Timer):
            # orchestration message: in-process shortcut
            self.local_put(sender, dest, msg)
            return
        frame = wire.encode_frame(sender, msg)
        with self._lock:
            conn = self._conns.get((sender, dest))
            if conn is None:
                conn = socket.create_connection(("127.0.0.1", self.runners[dest].port))
                self._conns[(sender, dest)] = conn
        try:
            conn.sendall(frame)
        except OSError:
            with self._lock:
                self._conns.pop((sender, dest), None)

    def record(self, node: str, kind: str, fields: dict) -> None:
        self.trace.append((time.monotonic() - self.t0, node, kind, fields))

    def stop(self) -> None:
        for runner in self.runners.values():
            runner.stop()
        with self._lock:
            for conn in self._conns.values():
                try:
                    conn.close()
                except OSError:
                    pass
            self._conns.clear()


def run_socket_demo(access: str = "te", data_size: int = 250, writes: int = 2, timeout_s: float = 30.0) -> dict:
    """Stand the system up on sockets, run a small write+read workload, and
    report wall-clock outcomes."""
    from .sim.scenario import ACCESS_BY_NAME, SimConfig, default_attribute_list
    from .sim.network import derive_rng
    from .bft.config import ReplicaConfig
    from .bft.replica import Replica
    from .client import OwnerNode, RequesterCreds, RequesterNode, StartRead, StartWrite
    from .kgc import Kgc
    from .ledger import LedgerNode
    from .sim.network import PrfCoin
    from .verifier import Verifier

    cfg = SimConfig(seed=1, writes=writes, client_count=4, access=access, data_size=data_size)
    cfg.validate()
    at = ACCESS_BY_NAME[access]
    setup_rng = derive_rng(cfg.seed, "setup")
    kgc = Kgc(setup_rng, n=cfg.n, f=cfg.f, be_group_size=cfg.client_count)
    verifier = Verifier(kgc.register("verifier", "verifier")["verifier_sk"])
    replica_grants = [kgc.register(f"replica-{i}", "replica", replica_id=i) for i in range(cfg.n)]
    owner_grant = kgc.register("owner-0", "owner")

    hub = SocketHub()
    coin = PrfCoin(cfg.seed)
    for i in range(cfg.n):
        rep = Replica(
            ReplicaConfig(n=cfg.n, f=cfg.f, replica_id=i, batch_cap=cfg.batch_cap),
            coin=coin,
            te_share=replica_grants[i]["te_share"],
            owner_mac_keys=dict(kgc.owner_mac_keys),
        )
        hub.add_node(rep.node_name(), rep)

    class _Driver:
        def __init__(self):
            self.done: queue.Queue = queue.Queue()

        def on_message(self, sender, msg, api):
            self.done.put((sender, msg))

    driver = _Driver()
    owner = OwnerNode(
        "owner-0",
        cfg.n,
        cfg.f,
        mac_key=owner_grant["mac_key"],
        write_keys_abe=owner_grant["abe_pk"],
        be_tree=owner_grant["be_tree"],
        te_pk=owner_grant["te_pk"],
        verifier_pk=owner_grant["verifier_pk"],
        driver="driver",
    )
    requesters: dict[str, RequesterNode] = {}
    for i in range(cfg.client_count):
        name = f"requester-{i}"
        attrs = {"Role_User"} if i == 0 else {"Role_User", "Tier_1"}
        grant = kgc.register(name, "requester", abe_attrs=attrs, be_leaf=i)
        creds = RequesterCreds(
            abe_attrs=frozenset(attrs),
            be_leaf=i,
            be_leaf_keys=grant.get("be_leaf_keys", []),
            te_vk=grant["te_vk"],
        )
        requesters[name] = RequesterNode(name, cfg.n, cfg.f, creds, grant["verifier_pk"], driver="driver")

    ledger = LedgerNode()
    ledger.chain.register_owner("owner-0")
    hub.add_node("owner-0", owner)
    for name, node in requesters.items():
        hub.add_node(name, node)
    hub.add_node("ledger", ledger)
    hub.add_node("verifier", verifier)
    hub.add_node("kgc", kgc)
    hub.add_node("driver", driver)
    hub.start()

    rng = random.Random(9)
    results = {"writes": [], "reads": [], "access": access}
    t_start = time.monotonic()
    try:
        for w in range(writes):
            m = rng.randbytes(data_size)
            t0 = time.monotonic()
            hub.local_put("driver", "owner-0", StartWrite(m=m, at=at, attribute_list=default_attribute_list(cfg, at)))
            sender, msg = driver.done.get(timeout=timeout_s)
            write_wall = time.monotonic() - t0
            results["writes"].append({"txid": msg.txid, "wall_s": write_wall})
            t0 = time.monotonic()
            hub.local_put("driver", "requester-1", StartRead(txid=msg.txid))
            sender, rmsg = driver.done.get(timeout=timeout_s)
            results["reads"].append(
                {"txid": rmsg.txid, "status": rmsg.status, "wall_s": time.monotonic() - t0}
            )
        delivered = requesters["requester-1"].sessions
        results["payload_verified"] = all(s.m is not None for s in delivered.values())
        results["total_wall_s"] = time.monotonic() - t_start
    finally:
        hub.stop()
    return results
