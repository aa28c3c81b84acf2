import hashlib
import json
import logging
import threading
from typing import Any, Dict, Optional

from cachetools import TTLCache

from app.core.config import settings

logger = logging.getLogger(__name__)


class CacheService:
    def __init__(self):
        self.cache = TTLCache(
            maxsize=settings.cache_max_entries, ttl=settings.cache_ttl_seconds
        )
        self.hits = 0
        self.misses = 0
        # guards the cache and the hit/miss counters
        self._lock = threading.Lock()

    def _generate_cache_key(self, operation: str, params: Dict[str, Any]) -> str:
        """
        Generate a cache key from the operation name and its parameters
        """
        key_data = {"operation": operation, "params": params}
        key_string = json.dumps(key_data, sort_keys=True, default=str)
        return hashlib.md5(key_string.encode()).hexdigest()

    def get(self, operation: str, params: Dict[str, Any]) -> Optional[Any]:
        """
        Get the cached report for a seeded run
        """
        cache_key = self._generate_cache_key(operation, params)

        with self._lock:
            result = self.cache.get(cache_key)
            if result is not None:
                self.hits += 1
            else:
                self.misses += 1

        if result is not None:
            logger.info(f"Cache hit for {operation} key: {cache_key}")
        else:
            logger.info(f"Cache miss for {operation} key: {cache_key}")

        return result

    def set(self, operation: str, params: Dict[str, Any], value: Any) -> None:
        cache_key = self._generate_cache_key(operation, params)
        with self._lock:
            self.cache[cache_key] = value
        logger.info(f"Cached {operation} report for key: {cache_key}")

    def clear(self) -> None:
        with self._lock:
            self.cache.clear()
        logger.info("Cache cleared")

    def get_stats(self) -> dict:
        """
        Get cache statistics
        """
        with self._lock:
            return {
                "size": len(self.cache),
                "maxsize": self.cache.maxsize,
                "ttl": self.cache.ttl,
                "hits": self.hits,
                "misses": self.misses,
            }
