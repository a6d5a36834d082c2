import json

import pytest

from medtest.errors import ConfigError
from medtest.settings import env_var_name, load_settings


def test_defaults():
    settings = load_settings(environ={})
    assert settings["smoother"]["h_x"] == 0.2
    assert settings["smoother"]["grid_size"] == 101
    assert settings["test"]["n_permutations"] == 200
    assert settings["test"]["keep_permuted"] is True
    assert settings["pipeline"]["noise_mode"] == "equal_errors"


def test_env_var_name():
    assert env_var_name("MED", "smoother", "h_x") == "MED_SMOOTHER_H_X"
    assert env_var_name("", "test", "seed") == "TEST_SEED"


def test_env_overrides_are_coerced():
    settings = load_settings(environ={
        "MED_SMOOTHER_H_X": "0.15",
        "MED_TEST_N_JOBS": "4",
        "MED_TEST_KEEP_PERMUTED": "off",
        "MED_PIPELINE_NOISE_MODE": "augment",
    })
    assert settings["smoother"]["h_x"] == 0.15
    assert settings["test"]["n_jobs"] == 4
    assert settings["test"]["keep_permuted"] is False
    assert settings["pipeline"]["noise_mode"] == "augment"


@pytest.mark.parametrize("name,value", [
    ("MED_TEST_N_JOBS", "four"),
    ("MED_TEST_KEEP_PERMUTED", "maybe"),
    ("MED_SMOOTHER_H_Y", "wide"),
])
def test_bad_env_value(name, value):
    with pytest.raises(ConfigError) as e:
        load_settings(environ={name: value})
    assert name in str(e.value)
    assert e.value.exit_code == 1


def test_user_file_merges(tmp_path):
    path = tmp_path / "med.json"
    path.write_text(json.dumps({"smoother": {"h_y": 0.3}, "test": {"alpha": 0.1}}))
    settings = load_settings(path, environ={"MED_TEST_ALPHA": "0.2"})
    assert settings["smoother"]["h_y"] == 0.3
    assert settings["smoother"]["h_x"] == 0.2
    assert settings["test"]["alpha"] == 0.2


def test_defaults_are_not_mutated(tmp_path):
    path = tmp_path / "med.json"
    path.write_text(json.dumps({"smoother": {"grid_size": 11}}))
    load_settings(path, environ={})
    assert load_settings(environ={})["smoother"]["grid_size"] == 101


def test_unreadable_user_file(tmp_path):
    with pytest.raises(ConfigError):
        load_settings(tmp_path / "missing.json", environ={})
    broken = tmp_path / "broken.json"
    broken.write_text("{not json")
    with pytest.raises(ConfigError):
        load_settings(broken, environ={})
    listed = tmp_path / "list.json"
    listed.write_text("[1, 2]")
    with pytest.raises(ConfigError):
        load_settings(listed, environ={})


def test_non_utf8_user_file(tmp_path):
    path = tmp_path / "latin1.json"
    path.write_bytes('{"pipeline": {"noise_mode": "\xe9"}}'.encode("latin-1"))
    with pytest.raises(ConfigError) as e:
        load_settings(path, environ={})
    assert "UTF-8" in str(e.value)
    assert e.value.exit_code == 1
