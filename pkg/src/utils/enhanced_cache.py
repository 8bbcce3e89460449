"""
Thread-safe LRU caches for expensive pure computations (local symbols,
conic searches, conjugator tables).
"""

import threading
import functools
from collections import OrderedDict
from typing import Dict, Any, Optional, Callable, Hashable
import logging

logger = logging.getLogger(__name__)

_MISSING = object()


class EnhancedCache:
    """
    LRU cache with hit/miss statistics.
    Thread-safe for concurrent batch evaluation.
    """

    def __init__(self, name: str, max_size: int = 4096):
        """
        Initialize the cache.

        Args:
            name: Identifier used in statistics and logs
            max_size: Maximum number of entries kept
        """
        self.name = name
        self.max_size = max_size
        self.entries: "OrderedDict[Hashable, Any]" = OrderedDict()
        self.lock = threading.Lock()
        self.hit_count = 0
        self.miss_count = 0
        logger.debug(f"EnhancedCache '{name}' initialized: max_size={max_size}")

    def get(self, key: Hashable, default: Any = None) -> Any:
        """
        Look a key up and refresh its recency.

        Args:
            key: Hashable key
            default: Returned when the key is absent

        Returns:
            Stored value or default
        """
        with self.lock:
            value = self.entries.get(key, _MISSING)
            if value is _MISSING:
                self.miss_count += 1
                return default
            self.entries.move_to_end(key)
            self.hit_count += 1
            return value

    def set(self, key: Hashable, value: Any) -> None:
        """
        Store a value, evicting the least recently used entry when full.

        Args:
            key: Hashable key
            value: Value to store
        """
        with self.lock:
            if key in self.entries:
                self.entries.move_to_end(key)
            elif len(self.entries) >= self.max_size:
                oldest_key, _ = self.entries.popitem(last=False)
                logger.debug(f"Cache '{self.name}': LRU eviction for key {oldest_key!r}")
            self.entries[key] = value

    def clear(self) -> None:
        """Drop every entry and reset statistics."""
        with self.lock:
            self.entries.clear()
            self.hit_count = 0
            self.miss_count = 0

    def resize(self, max_size: int) -> None:
        with self.lock:
            self.max_size = max_size
            while len(self.entries) > max_size:
                self.entries.popitem(last=False)

    def get_stats(self) -> Dict[str, Any]:
        """
        Cache performance statistics.

        Returns:
            Dictionary with hits, misses, ratio and size
        """
        with self.lock:
            total = self.hit_count + self.miss_count
            return {
                "name": self.name,
                "size": len(self.entries),
                "max_size": self.max_size,
                "hits": self.hit_count,
                "misses": self.miss_count,
                "hit_ratio": round(self.hit_count / total, 4) if total else 0.0,
            }


class CacheManager:
    """Registry of named caches."""

    def __init__(self, default_size: int = 4096):
        self.default_size = default_size
        self.caches: Dict[str, EnhancedCache] = {}
        self.lock = threading.Lock()

    def get_cache(self, name: str, max_size: Optional[int] = None) -> EnhancedCache:
        with self.lock:
            if name not in self.caches:
                self.caches[name] = EnhancedCache(name, max_size or self.default_size)
            return self.caches[name]

    def configure(self, max_size: int) -> None:
        """Apply a new size limit to every cache."""
        with self.lock:
            self.default_size = max_size
            caches = list(self.caches.values())
        for cache in caches:
            cache.resize(max_size)

    def clear_all(self) -> None:
        with self.lock:
            caches = list(self.caches.values())
        for cache in caches:
            cache.clear()
        logger.info("All caches cleared")

    def get_all_stats(self) -> Dict[str, Dict[str, Any]]:
        with self.lock:
            caches = list(self.caches.values())
        return {cache.name: cache.get_stats() for cache in caches}


cache_manager = CacheManager()


def cached(cache_name: str) -> Callable:
    """
    Memoize a pure function in a named cache. Arguments must be hashable.
    """
    def decorator(func: Callable) -> Callable:
        @functools.wraps(func)
        def wrapper(*args, **kwargs):
            cache = cache_manager.get_cache(cache_name)
            key = (args, tuple(sorted(kwargs.items())))
            value = cache.get(key, _MISSING)
            if value is _MISSING:
                value = func(*args, **kwargs)
                cache.set(key, value)
            return value
        wrapper.cache_name = cache_name
        return wrapper
    return decorator
