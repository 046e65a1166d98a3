import hashlib
import random

import pytest

import pstore


def test_sha1_matches_hashlib():
    for data in [b"", b"abc", b"node:n0", bytes(range(256))]:
        assert pstore.sha1_hex(data) == hashlib.sha1(data).hexdigest()


def test_in_ring_against_definition():
    def walk(k, lo, hi, m):
        if lo == hi:
            return True
        x = (lo + 1) % m
        while True:
            if x == k:
                return True
            if x == hi:
                return False
            x = (x + 1) % m

    top = 2**160
    rng = random.Random(3)
    for _ in range(300):
        lo, hi, k = (rng.randrange(16) for _ in range(3))
        assert pstore.in_ring(k, lo, hi) == walk(k, lo, hi, 16)
    assert pstore.in_ring(1, top - 5, 3)
    assert not pstore.in_ring(top - 6, top - 5, 3)


def test_fixtures_listed_and_pass():
    names = pstore.fixtures()
    assert "bank-default" in names and "failover-basic" in names
    for name in names:
        report = pstore.run(name)
        assert report["exit_code"] == 0, name
        assert report["passed"]


def test_bank_anomaly_sums():
    assert pstore.interleave("optimistic")["violations"] == 0
    assert pstore.interleave("default")["violations"] > 0


def test_sweep_has_no_mixed_reads():
    report = pstore.sweep("bank-default", 0)
    assert report["mixed"] == 0
    assert {r["outcome"] for r in report["runs"]} <= {"OLD", "NEW"}


def test_restart_over_directories(tmp_path):
    report = pstore.restart("restart-persistence", 8, durable=f"dir:{tmp_path}")
    assert report["recovered"] and report["exit_code"] == 0


def test_parse_error_is_value_error():
    with pytest.raises(ValueError, match="line 2"):
        pstore.run_text("seed=1\nnodes=0\n")


def test_cluster_routing_and_replicas():
    cluster = pstore.Cluster(seed=5, replication=3)
    ids = {cluster.join(f"n{i}"): f"n{i}" for i in range(8)}
    cluster.stabilize()

    ring = sorted(ids)

    def successor(k):
        return next((n for n in ring if n >= k), ring[0])

    rng = random.Random(9)
    keys = [format(rng.getrandbits(160), "040x") for _ in range(200)]
    for k in keys:
        assert cluster.responsible(k) == ids[successor(k)]
        cluster.put(k, k.encode())

    cluster.fail("n3")
    cluster.stabilize()
    assert cluster.placement_violations() == 0
    for k in keys[:20]:
        assert cluster.get(k) == k.encode()
        assert len(cluster.copies(k)) == 3


def test_errors_carry_codes():
    cluster = pstore.Cluster(nodes=2)
    with pytest.raises(pstore.Error) as info:
        cluster.get("00" * 20)
    assert info.value.code == "NOT_FOUND"
