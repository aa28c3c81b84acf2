from concurrent.futures import ThreadPoolExecutor

from app.services.cache_service import CacheService


def test_cache_miss_then_hit():
    """Test a miss is counted before the value is stored"""
    cache = CacheService()
    params = {"section": "midpoint", "n": 2, "seed": 0}

    assert cache.get("verify", params) is None
    cache.set("verify", params, {"passed": True})

    assert cache.get("verify", params) == {"passed": True}
    assert cache.get_stats()["hits"] == 1
    assert cache.get_stats()["misses"] == 1


def test_key_ignores_parameter_order():
    """Test keys do not depend on parameter order"""
    cache = CacheService()
    cache.set("fixed", {"n": 3, "m": 2}, "result")
    assert cache.get("fixed", {"m": 2, "n": 3}) == "result"


def test_operations_do_not_share_entries():
    """Test entries are separated by operation"""
    cache = CacheService()
    cache.set("verify", {"n": 2}, "a")
    assert cache.get("obstruct", {"n": 2}) is None


def test_clear():
    """Test clear empties the cache"""
    cache = CacheService()
    cache.set("verify", {"n": 2}, "a")
    cache.clear()
    assert cache.get_stats()["size"] == 0


def test_concurrent_access_keeps_counts():
    """Counters stay exact under concurrent gets and sets"""
    cache = CacheService()

    def worker(i):
        params = {"n": i % 10}
        if cache.get("verify", params) is None:
            cache.set("verify", params, i)

    with ThreadPoolExecutor(max_workers=8) as pool:
        list(pool.map(worker, range(2000)))

    stats = cache.get_stats()
    assert stats["hits"] + stats["misses"] == 2000
    assert stats["size"] == 10
