import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))  # for oracles.py

from topikos.config import load_config
from topikos.registry import load_registry

FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")
REGISTRY_DIR = os.path.join(FIXTURES, "registry")
GOLDEN = os.path.join(os.path.dirname(__file__), "golden")


def fixture_path(name: str) -> str:
    return os.path.join(FIXTURES, name)


def fixture_text(name: str) -> str:
    with open(fixture_path(name), encoding="utf-8") as fh:
        return fh.read()


@pytest.fixture(scope="session")
def app_config():
    return load_config(os.path.join(REGISTRY_DIR, "config.json"))


@pytest.fixture(scope="session")
def registry(app_config):
    return load_registry(app_config)


@pytest.fixture()
def live_server(tmp_path, app_config, registry):
    """Real uvicorn server on an ephemeral port, for HTTP-client tests."""
    import threading
    import time

    import uvicorn

    from topikos.config import merge_overrides
    from topikos.service.app import create_app

    config = merge_overrides(app_config, {"data_dir": str(tmp_path)})
    app = create_app(config, registry=registry)
    server = uvicorn.Server(uvicorn.Config(app, host="127.0.0.1", port=0, log_level="warning"))
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    deadline = time.time() + 10
    while not server.started:
        if time.time() > deadline:
            raise RuntimeError("server did not start")
        time.sleep(0.01)
    port = server.servers[0].sockets[0].getsockname()[1]
    yield f"http://127.0.0.1:{port}"
    server.should_exit = True
    thread.join(timeout=5)
