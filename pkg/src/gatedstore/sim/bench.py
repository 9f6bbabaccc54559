"""Wall-clock micro-benchmarks of the three access-control schemes plus an
end-to-end write/read timing pass.

Runs outside simulated time.  The one assertion worth making at desk scale
is qualitative: stream-cipher broadcast encryption is cheaper than
threshold encryption, which is cheaper than attribute encryption.
Absolute numbers vary with the host and are reported, not asserted.
"""

from __future__ import annotations

import random
import statistics
import time

from ..crypto import (
    abe_keygen,
    abe_setup,
    be_build_tree,
    be_decrypt,
    be_encrypt,
    te_setup,
    te_share_dec,
)
from .scenario import SimConfig, run_scenario


def _stats(samples: list[float]) -> dict:
    return {
        "mean": statistics.fmean(samples),
        "min": min(samples),
        "max": max(samples),
        "stdev": statistics.pstdev(samples) if len(samples) > 1 else 0.0,
    }


def bench_schemes(payload_size: int = 250, reps: int = 20, seed: int = 1) -> dict:
    rng = random.Random(seed)
    abe = abe_setup(128, rng)
    tree = be_build_tree(4, b"bench-group")
    te = te_setup(4, 2, rng)
    m = rng.randbytes(payload_size)

    out: dict = {"payload_size": payload_size, "reps": reps, "schemes": {}}

    # attribute encryption: 3-attribute policy
    formula = "Attr_A AND Attr_B AND Attr_C"
    sk = abe_keygen(abe, {"Attr_A", "Attr_B", "Attr_C"}, rng)
    enc, dec = [], []
    for _ in range(reps):
        t0 = time.perf_counter()
        from ..crypto import abe_encrypt

        ct = abe_encrypt(abe.pk, m, formula, rng)
        t1 = time.perf_counter()
        from ..crypto import abe_decrypt

        abe_decrypt(sk, ct)
        t2 = time.perf_counter()
        enc.append((t1 - t0) * 1000)
        dec.append((t2 - t1) * 1000)
    out["schemes"]["abe"] = {"encrypt_ms": _stats(enc), "decrypt_ms": _stats(dec)}

    # broadcast encryption: 4 clients, 1 revoked
    enc, dec = [], []
    for _ in range(reps):
        t0 = time.perf_counter()
        bundle = be_encrypt(m, tree, {0}, rng)
        t1 = time.perf_counter()
        be_decrypt(tree.leaf_keys(1), 1, bundle)
        t2 = time.perf_counter()
        enc.append((t1 - t0) * 1000)
        dec.append((t2 - t1) * 1000)
    out["schemes"]["be"] = {"encrypt_ms": _stats(enc), "decrypt_ms": _stats(dec)}

    # threshold encryption: n=4, t=2
    from ..crypto import te_combine, te_encrypt

    enc, dec = [], []
    for _ in range(reps):
        t0 = time.perf_counter()
        ct = te_encrypt(te.pk, m, b"bench-label", rng)
        t1 = time.perf_counter()
        shares = [te_share_dec(te.shares[i], ct, b"bench-label", rng) for i in range(2)]
        te_combine(te.vk, ct, b"bench-label", shares)
        t2 = time.perf_counter()
        enc.append((t1 - t0) * 1000)
        dec.append((t2 - t1) * 1000)
    out["schemes"]["te"] = {"encrypt_ms": _stats(enc), "decrypt_ms": _stats(dec)}

    means = {s: out["schemes"][s]["encrypt_ms"]["mean"] for s in ("abe", "be", "te")}
    out["encryption_ordering_be_lt_te_lt_abe"] = means["be"] < means["te"] < means["abe"]
    return out


def bench_end_to_end(seed: int = 1, data_size: int = 250) -> dict:
    """Wall-clock a small full write/read workload per access type."""
    out = {}
    for access in ("abe", "be", "te"):
        cfg = SimConfig(
            seed=seed,
            writes=3,
            client_count=4,
            access=access,
            reads="honest",
            data_size=data_size,
        )
        t0 = time.perf_counter()
        system, result = run_scenario(cfg)
        out[access] = {
            "wall_s": time.perf_counter() - t0,
            "steps": result.steps,
            "all_properties_pass": result.all_passed(),
            "write_phases": result.metrics["write_phases"],
            "read_phases": result.metrics["read_phases"],
        }
    return out


def run_bench(payload_size: int = 250, reps: int = 20, seed: int = 1) -> dict:
    report = bench_schemes(payload_size=payload_size, reps=reps, seed=seed)
    report["end_to_end"] = bench_end_to_end(seed=seed, data_size=payload_size)
    return report
