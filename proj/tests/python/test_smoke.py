"""Smoke tests for the python module: a few known values and one run of
each main operation end to end."""
import math
import os
import sys

import satcache


def approx(a, b, rel=1e-6):
    return abs(a - b) <= rel * max(1.0, abs(a), abs(b))


def test_shannon():
    assert approx(satcache.shannon_efficiency(0.0), 1.0, 1e-12)
    assert approx(satcache.shannon_efficiency(4.08), 1.8313040560091862, 1e-12)


def test_feedtime_closed_form():
    # One CDN, one file, any positive target: tau = q / (W * gamma).
    inst = satcache.Instance.synthetic(
        num_cdns=1, num_items=1, seed=3, cache_gb=40.0,
        total_bandwidth_hz=1e8, requests_per_cdn=500.0)
    result = satcache.minimize_feeding_time(inst, target_chr=0.5)
    assert result["feasible"]
    assert result["hits"] >= 0.5 * inst.total_requests
    # trace is non-increasing
    trace = result["tau_trace"]
    assert all(b <= a * (1 + 1e-6) for a, b in zip(trace, trace[1:]))


def test_hits_and_references():
    inst = satcache.Instance.synthetic(
        num_cdns=3, num_items=12, seed=7, cache_gb=4.0,
        total_bandwidth_hz=2e8, requests_per_cdn=800.0)
    joint = satcache.maximize_hits(inst, tau_s=60.0)
    assert joint["feasible"]
    assert 0.0 < joint["chr"] <= 1.0
    for which in ("ref1", "ref2", "ref3"):
        base = satcache.reference(inst, which, objective="hits", tau_s=60.0)
        assert base["feasible"]
        assert joint["hits"] >= base["hits"] - 1e-9


def test_scenario_file_roundtrip():
    data = os.environ.get("SATCACHE_DATA")
    if not data:
        return
    inst = satcache.Instance.from_scenario_file(
        os.path.join(data, "toy_scenario.json"))
    assert inst.num_cdns == 3
    assert inst.num_items == 12
    assert not inst.validate()


def main():
    failures = 0
    for name, fn in sorted(globals().items()):
        if name.startswith("test_") and callable(fn):
            try:
                fn()
                print(f"PASS {name}")
            except AssertionError as err:
                failures += 1
                print(f"FAIL {name}: {err}")
    return failures


if __name__ == "__main__":
    sys.exit(main())
