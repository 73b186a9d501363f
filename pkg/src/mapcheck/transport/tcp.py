"""TCP transport: full mesh between statically configured workers.

Worker ``i`` listens on ``hosts[i]``, dials every ``j > i`` and accepts every
``j < i``. Each connection starts with a handshake carrying the protocol
version, the sender's index and a hash of the model; any mismatch aborts
both sides. Afterwards each direction carries frames: a u32 big-endian length
followed by a message payload (see :mod:`mapcheck.wire`).

One reader thread per socket decodes frames into the worker's inbox; the
worker thread is the only sender and the only consumer.
"""

from __future__ import annotations

import logging
import os
import socket
import struct
import threading
import time
from collections import deque
from dataclasses import dataclass

from ..wire import Message, decode_message, encode_message

log = logging.getLogger(__name__)

PROTOCOL_VERSION = 1
MAGIC = b"MAPC"
_HANDSHAKE = struct.Struct(">4sHIQ")
_LEN = struct.Struct(">I")
TAG_STATS = 0x03
_STATS = struct.Struct(">BQQQQ")

DEFAULT_CONNECT_TIMEOUT = 30.0
DEFAULT_WATCHDOG = 60.0
HIGH_WATER = 1_000_000
WORKER_INDEX_ENV = "MAPCHECK_WORKER_INDEX"


class TransportError(RuntimeError):
    pass


class HandshakeError(TransportError):
    pass


class ProtocolStall(TransportError):
    pass


def parse_hosts(text: str) -> list[tuple[str, int]]:
    """One ``host:port`` per line; blank lines and ``#`` comments ignored."""
    hosts = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        host, sep, port = line.rpartition(":")
        if not sep or not host or not port.isdigit():
            raise ValueError(f"line {lineno}: expected host:port, got {line!r}")
        hosts.append((host, int(port)))
    if not hosts:
        raise ValueError("host list is empty")
    return hosts


def worker_index(flag: int | None) -> int | None:
    """The environment variable, when set, overrides the command-line flag."""
    env = os.environ.get(WORKER_INDEX_ENV)
    if env is not None and env.strip():
        return int(env)
    return flag


@dataclass(frozen=True)
class PeerStats:
    owned_states: int
    transitions: int
    states_sent: int
    states_received: int


def _recv_exact(sock: socket.socket, n: int) -> bytes:
    buf = bytearray()
    while len(buf) < n:
        chunk = sock.recv(n - len(buf))
        if not chunk:
            raise EOFError
        buf += chunk
    return bytes(buf)


class TcpEndpoint:
    def __init__(
        self,
        hosts: list[tuple[str, int]],
        index: int,
        width: int,
        model_hash: int,
    ) -> None:
        if not 0 <= index < len(hosts):
            raise ValueError(f"worker index {index} outside host list of {len(hosts)}")
        self.hosts = hosts
        self.worker_id = index
        self.workers = len(hosts)
        self.width = width
        self.model_hash = model_hash
        self.socks: dict[int, socket.socket] = {}
        self._inbox: deque[tuple[int, object]] = deque()
        self._cond = threading.Condition()
        self._readers: list[threading.Thread] = []
        self._errors: list[str] = []
        # peers that sent their end-of-run stats; EOF from them is expected
        self._said_bye: set[int] = set()
        self.finished = False
        self.frames_sent = 0
        self.frames_received = 0

    # -- connection setup --------------------------------------------------

    def _hello(self) -> bytes:
        return _HANDSHAKE.pack(MAGIC, PROTOCOL_VERSION, self.worker_id, self.model_hash)

    def _check_hello(self, data: bytes, expect: int | None) -> int:
        magic, version, index, model_hash = _HANDSHAKE.unpack(data)
        if magic != MAGIC:
            raise HandshakeError("peer is not a mapcheck worker")
        if version != PROTOCOL_VERSION:
            raise HandshakeError(f"protocol version mismatch: ours {PROTOCOL_VERSION}, peer {version}")
        if model_hash != self.model_hash:
            raise HandshakeError(
                f"model mismatch with worker {index}: ours {self.model_hash:016x}, "
                f"peer {model_hash:016x}"
            )
        if expect is not None and index != expect:
            raise HandshakeError(f"expected worker {expect}, peer says {index}")
        if not 0 <= index < self.workers or index == self.worker_id:
            raise HandshakeError(f"bad peer index {index}")
        return index

    def connect(self, timeout: float = DEFAULT_CONNECT_TIMEOUT) -> None:
        if self.workers == 1:
            return
        deadline = time.monotonic() + timeout
        host, port = self.hosts[self.worker_id]
        listener = socket.create_server((host, port), reuse_port=False)
        listener.settimeout(0.2)
        try:
            for j in range(self.worker_id + 1, self.workers):
                self.socks[j] = self._dial(j, deadline)
            while len(self.socks) < self.workers - 1:
                if time.monotonic() > deadline:
                    raise TransportError(f"timed out waiting for peers after {timeout:.0f}s")
                try:
                    conn, _ = listener.accept()
                except socket.timeout:
                    continue
                conn.settimeout(max(0.1, deadline - time.monotonic()))
                try:
                    peer = self._check_hello(_recv_exact(conn, _HANDSHAKE.size), None)
                except HandshakeError:
                    conn.sendall(self._hello())
                    conn.close()
                    raise
                conn.sendall(self._hello())
                self.socks[peer] = conn
        finally:
            listener.close()
        for peer, sock in self.socks.items():
            sock.settimeout(None)
            sock.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
            t = threading.Thread(target=self._reader, args=(peer, sock), daemon=True)
            t.start()
            self._readers.append(t)

    def _dial(self, j: int, deadline: float) -> socket.socket:
        host, port = self.hosts[j]
        while True:
            try:
                sock = socket.create_connection((host, port), timeout=1.0)
                break
            except OSError:
                if time.monotonic() > deadline:
                    raise TransportError(f"could not connect to worker {j} at {host}:{port}") from None
                time.sleep(0.05)
        sock.settimeout(max(0.1, deadline - time.monotonic()))
        sock.sendall(self._hello())
        try:
            self._check_hello(_recv_exact(sock, _HANDSHAKE.size), j)
        except EOFError:
            raise HandshakeError(f"worker {j} closed the connection during handshake") from None
        except HandshakeError:
            sock.close()
            raise
        return sock

    # -- data path ---------------------------------------------------------

    def _reader(self, peer: int, sock: socket.socket) -> None:
        try:
            while True:
                (n,) = _LEN.unpack(_recv_exact(sock, _LEN.size))
                payload = _recv_exact(sock, n)
                if payload and payload[0] == TAG_STATS:
                    _, *fields = _STATS.unpack(payload)
                    item: object = PeerStats(*fields)
                    self._said_bye.add(peer)
                else:
                    item = decode_message(payload, self.width)
                with self._cond:
                    self._inbox.append((peer, item))
                    self.frames_received += 1
                    if len(self._inbox) == HIGH_WATER:
                        log.warning("worker %d inbox reached %d frames", self.worker_id, HIGH_WATER)
                    self._cond.notify()
        except (EOFError, OSError) as exc:
            if not self.finished and peer not in self._said_bye:
                with self._cond:
                    self._errors.append(f"connection to worker {peer} lost: {exc!r}")
                    self._cond.notify()
        except Exception as exc:  # corrupt frame
            with self._cond:
                self._errors.append(f"bad frame from worker {peer}: {exc}")
                self._cond.notify()

    def _raise_errors(self) -> None:
        if self._errors and not self.finished:
            raise TransportError(self._errors[0])

    def send(self, dst: int, msg: Message) -> None:
        self._send_payload(dst, encode_message(msg))

    def _send_payload(self, dst: int, payload: bytes) -> None:
        try:
            self.socks[dst].sendall(_LEN.pack(len(payload)) + payload)
        except OSError as exc:
            if not self.finished:
                raise TransportError(f"send to worker {dst} failed: {exc}") from exc
        self.frames_sent += 1

    def send_stats(self, dst: int, stats: PeerStats) -> None:
        self._send_payload(
            dst,
            _STATS.pack(TAG_STATS, stats.owned_states, stats.transitions,
                        stats.states_sent, stats.states_received),
        )

    def poll(self) -> list[tuple[int, Message]]:
        with self._cond:
            self._raise_errors()
            out = list(self._inbox)
            self._inbox.clear()
        return out  # type: ignore[return-value]

    def wait(self, timeout: float = DEFAULT_WATCHDOG) -> None:
        """Block until something is in the inbox; raise after ``timeout`` seconds."""
        with self._cond:
            if not self._cond.wait_for(lambda: self._inbox or self._errors, timeout):
                raise ProtocolStall(
                    f"worker {self.worker_id} received nothing for {timeout:.0f}s"
                )
            self._raise_errors()

    def close(self, timeout: float = 5.0) -> None:
        self.finished = True
        for sock in self.socks.values():
            try:
                sock.shutdown(socket.SHUT_WR)
            except OSError:
                pass
        deadline = time.monotonic() + timeout
        for t in self._readers:
            t.join(max(0.0, deadline - time.monotonic()))
        for sock in self.socks.values():
            sock.close()
