import logging
import os
import stat
import time

import pytest

from wdd.core import OracleCache, content_digest
from wdd.oracle import (
    DirectoryCache,
    InitialTestFailed,
    OracleConfig,
    OracleError,
    ScriptOracle,
    run_oracle,
    verify_initial,
)
from wdd.tree import build_tree, fixpoint_reduce, render


def make_script(tmp_path, body, name="check.sh"):
    path = tmp_path / name
    path.write_text("#!/bin/sh\n" + body + "\n")
    path.chmod(path.stat().st_mode | stat.S_IXUSR)
    return path


@pytest.mark.parametrize("body, verdict", [("exit 0", True), ("exit 1", False), ("exit 7", False)])
def test_exit_status_is_the_verdict(tmp_path, body, verdict):
    config = OracleConfig(make_script(tmp_path, body)).validate()
    assert run_oracle(b"anything", config) is verdict


def test_candidate_location_and_environment(tmp_path):
    out = tmp_path / "seen"
    script = make_script(tmp_path, f'printf "%s|%s|%s|" "$1" "$REDUCE_CANDIDATE" "$(pwd)" > {out}; cat "$1" >> {out}')
    config = OracleConfig(script, filename="prog.c").validate()
    assert run_oracle(b"int x;", config)
    arg, env, cwd, content = out.read_text().split("|")
    assert arg == env and os.path.basename(arg) == "prog.c"
    assert os.path.dirname(arg) == cwd
    assert content == "int x;"
    assert not os.path.exists(cwd)


def test_keep_temps(tmp_path):
    out = tmp_path / "dir"
    config = OracleConfig(make_script(tmp_path, f'pwd > {out}'), keep_temps=True).validate()
    run_oracle(b"x", config)
    kept = out.read_text().strip()
    assert os.path.isdir(kept)


def test_env_passthrough(tmp_path, monkeypatch):
    out = tmp_path / "env"
    monkeypatch.setenv("WDD_VISIBLE", "yes")
    monkeypatch.setenv("WDD_HIDDEN", "no")
    script = make_script(tmp_path, f'echo "$WDD_VISIBLE-$WDD_HIDDEN" > {out}')
    config = OracleConfig(script, env_passthrough=["WDD_VISIBLE", "PATH"]).validate()
    run_oracle(b"", config)
    assert out.read_text().strip() == "yes-"


def test_timeout_is_false_and_kills_the_process_group(tmp_path, caplog):
    pidfile = tmp_path / "child.pid"
    script = make_script(tmp_path, f"sleep 30 & echo $! > {pidfile}; wait")
    config = OracleConfig(script, timeout=0.5).validate()
    start = time.monotonic()
    with caplog.at_level(logging.WARNING, logger="wdd.oracle"):
        assert run_oracle(b"x", config) is False
    assert time.monotonic() - start < 10
    assert "timed out" in caplog.text
    child = int(pidfile.read_text())
    time.sleep(0.2)
    assert not _running(child)


def _running(pid):
    # a killed orphan may linger as a zombie if nothing reaps it
    try:
        with open(f"/proc/{pid}/status") as fh:
            state = next(line for line in fh if line.startswith("State:"))
    except FileNotFoundError:
        return False
    return "Z" not in state.split()[1]


def test_timeout_can_abort(tmp_path):
    config = OracleConfig(make_script(tmp_path, "sleep 30"), timeout=0.3, on_timeout="abort").validate()
    with pytest.raises(OracleError):
        run_oracle(b"x", config)


def test_missing_script(tmp_path):
    with pytest.raises(OracleError, match="not found"):
        OracleConfig(tmp_path / "nope.sh").validate()


def test_script_not_executable(tmp_path):
    path = tmp_path / "plain.sh"
    path.write_text("exit 0\n")
    with pytest.raises(OracleError, match="not executable"):
        OracleConfig(path).validate()


def test_unrunnable_script_is_an_infrastructure_error(tmp_path):
    path = tmp_path / "garbage"
    path.write_bytes(b"\x7fELF not really")
    path.chmod(0o755)
    with pytest.raises(OracleError):
        run_oracle(b"", OracleConfig(path).validate())


@pytest.mark.parametrize("kwargs", [{"timeout": 0}, {"timeout": -1}, {"on_timeout": "maybe"},
                                    {"filename": ""}, {"filename": "a/b"}])
def test_config_validation(tmp_path, kwargs):
    with pytest.raises(ValueError):
        OracleConfig(make_script(tmp_path, "exit 0"), **kwargs).validate()


def test_verify_initial(tmp_path):
    verify_initial(b"x", OracleConfig(make_script(tmp_path, "exit 0", "ok.sh")).validate())
    with pytest.raises(InitialTestFailed, match="status 1"):
        verify_initial(b"x", OracleConfig(make_script(tmp_path, "exit 1", "bad.sh")).validate())
    with pytest.raises(InitialTestFailed, match="timed out"):
        verify_initial(b"x", OracleConfig(make_script(tmp_path, "sleep 30", "slow.sh"), timeout=0.3).validate())


def test_directory_cache_persists(tmp_path):
    first = DirectoryCache(tmp_path / "cache")
    key = content_digest(b"abc")
    first.put(key, True)
    first.put(content_digest(b"x"), False)
    assert (tmp_path / "cache" / key).read_bytes() == b"1"
    second = DirectoryCache(tmp_path / "cache")
    assert second.lookup(key) is True
    assert second.lookup(content_digest(b"x")) is False
    assert second.lookup(content_digest(b"new")) is None
    assert (second.hits, second.misses) == (2, 1)


def test_directory_cache_ignores_corrupt_entries(tmp_path):
    cache = DirectoryCache(tmp_path)
    (tmp_path / "deadbeef").write_bytes(b"garbage")
    assert cache.get("deadbeef") is None


def test_script_oracle_counts_spawns(tmp_path):
    oracle = ScriptOracle(OracleConfig(make_script(tmp_path, "exit 0")))
    oracle(b"a")
    oracle(b"a")
    assert oracle.invocations == 2


def test_cache_parity_with_real_script(tmp_path):
    """Same verdicts and output with or without the cache; spawns equal distinct contents."""
    log = tmp_path / "spawns"
    script = make_script(
        tmp_path, f'md5sum "$1" | cut -d" " -f1 >> {log}; grep -q keep1 "$1" && grep -q keep2 "$1"')
    source = b"a b keep1 c\nd (e keep2) f\ng h i\n"

    results = {}
    for use_cache in (False, True):
        log.write_text("")
        oracle = ScriptOracle(OracleConfig(script))
        verdicts = []

        def recording(data, oracle=oracle, verdicts=verdicts):
            v = oracle(data)
            verdicts.append((data, v))
            return v

        cache = OracleCache() if use_cache else None
        out = fixpoint_reduce(build_tree(source), "wddmin", recording, cache=cache)
        spawned = log.read_text().split()
        results[use_cache] = (render(out), dict(verdicts), spawned, oracle.invocations)

    plain, cached = results[False], results[True]
    assert plain[0] == cached[0]
    for data, verdict in cached[1].items():
        assert plain[1][data] == verdict
    # with the cache every spawn is for new content
    assert len(cached[2]) == len(set(cached[2])) == cached[3]
    assert len(set(plain[2])) == len(cached[2])
    assert len(plain[2]) > len(cached[2])
