import pytest

from config import Settings, _env_file_values, get_env_var, load_settings


@pytest.fixture(autouse=True)
def no_budget_overrides(monkeypatch):
    for name in ("SCOTTLAB_MAX_STRUCTURES", "SCOTTLAB_SEARCH_BUDGET", "SCOTTLAB_SCHEMA_BUDGET"):
        monkeypatch.delenv(name, raising=False)


def test_env_file_parsing(tmp_path):
    env = tmp_path / ".env"
    env.write_text('# budgets\nSCOTTLAB_SCHEMA_BUDGET="32"\n\nnot a pair\nOTHER = x \n', encoding="utf-8")
    assert _env_file_values(env) == {"SCOTTLAB_SCHEMA_BUDGET": "32", "OTHER": "x"}
    assert _env_file_values(tmp_path / "missing") == {}


def test_environment_wins(monkeypatch):
    monkeypatch.setenv("SCOTTLAB_TEST_VALUE", "from-env")
    assert get_env_var("SCOTTLAB_TEST_VALUE", "fallback") == "from-env"


def test_budget_overrides(monkeypatch):
    monkeypatch.setenv("SCOTTLAB_SEARCH_BUDGET", "500")
    settings = load_settings()
    assert settings.search_budget == 500
    assert settings.schema_budget == Settings().schema_budget


@pytest.mark.parametrize("raw", ["many", "0", "-3"])
def test_bad_budgets_stop_start_up(monkeypatch, raw):
    monkeypatch.setenv("SCOTTLAB_MAX_STRUCTURES", raw)
    with pytest.raises(RuntimeError, match="SCOTTLAB_MAX_STRUCTURES"):
        load_settings()
