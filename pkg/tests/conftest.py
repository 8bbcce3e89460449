import pytest

from src.utils.enhanced_cache import cache_manager
from src.utils.env_setup import ENV_PREFIX, Settings


@pytest.fixture(autouse=True)
def _isolated_settings(monkeypatch):
    """Tests never see QMR_* variables from the developer's shell or .env."""
    for name in Settings.model_fields:
        monkeypatch.delenv(ENV_PREFIX + name.upper(), raising=False)
    yield


@pytest.fixture
def settings() -> Settings:
    return Settings(search_bound=20, seed=0, workers=2)


@pytest.fixture
def fresh_caches():
    cache_manager.clear_all()
    yield cache_manager
    cache_manager.clear_all()
