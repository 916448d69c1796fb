"""Serve the fixture-corpus graph over real HTTP for the live UI test.

Binds an ephemeral port, prints one SERVING line, then blocks until killed.
"""

from __future__ import annotations

import socket
import sys
from pathlib import Path

import uvicorn

sys.path.insert(0, str(Path(__file__).resolve().parent))

from capture_fixtures import build_fixture_app


def main() -> None:
    app, _capped, _ids = build_fixture_app()
    sock = socket.create_server(("127.0.0.1", 0))
    host, port = sock.getsockname()
    print(f"SERVING http://{host}:{port}", flush=True)
    config = uvicorn.Config(app, log_level="warning")
    uvicorn.Server(config).run(sockets=[sock])


if __name__ == "__main__":
    main()
