"""Parametric example models generated programmatically.

readers_writers(R, W, ERROR)
    R readers and W writers share a resource. A state is one byte per process
    (0 idle, 1 active). Accepting states are those where a reader and a writer
    are active together. With ERROR=1 writers ignore active readers, so an
    accepting cycle exists; with ERROR=0 no accepting state is reachable.

token_ring(N, ERROR)
    N processes pass a single token around a ring; a process needs the token
    to enter its critical section. Byte 0 is the token holder, then one byte
    per process (0 idle, 1 trying, 2 critical). Accepting: two or more
    processes critical. ERROR=1 lets the last process enter without the token.

counter_cycle(n, RESET, EVERY)
    A down-counter from n-1 to 0, 4-byte big-endian. At 0 it wraps to n-1 when
    RESET=1 and halts otherwise. States divisible by EVERY are accepting. With
    RESET=0 every accepting state except the first is dominated, which makes
    the MAP search take one iteration per accepting state.
"""

from __future__ import annotations

from typing import Callable

from .model import ID_WIDTH, MalformedState, ModelError, TransitionSystem, decode_id, encode_id


class UnknownModel(ModelError):
    pass


class ParameterError(ModelError):
    pass


class ReadersWriters(TransitionSystem):
    def __init__(self, readers: int, writers: int, error: int) -> None:
        self.readers = readers
        self.writers = writers
        self.error = error
        self.state_width = readers + writers
        self.name = f"readers_writers(R={readers},W={writers},ERROR={error})"

    def initial_states(self) -> list[bytes]:
        return [bytes(self.state_width)]

    def successors(self, state: bytes) -> list[bytes]:
        flags = self.decode(state)
        r = self.readers
        nr = sum(flags[:r])
        nw = sum(flags[r:])
        out = []
        for i in range(self.state_width):
            if flags[i]:
                ok = True
            elif i < r:
                ok = nw == 0
            else:
                ok = nw == 0 and (nr == 0 or self.error == 1)
            if ok:
                nxt = bytearray(state)
                nxt[i] ^= 1
                out.append(bytes(nxt))
        return out

    def accepting(self, state: bytes) -> bool:
        flags = self.decode(state)
        return any(flags[: self.readers]) and any(flags[self.readers :])

    def encode(self, value: tuple[int, ...]) -> bytes:
        if len(value) != self.state_width or any(v not in (0, 1) for v in value):
            raise ValueError(f"bad readers/writers state {value!r}")
        return bytes(value)

    def decode(self, state: bytes) -> tuple[int, ...]:
        self.check_width(state)
        if any(b > 1 for b in state):
            raise MalformedState(f"process flag out of range in {state.hex()}")
        return tuple(state)

    @property
    def fingerprint(self) -> str:
        return "builtin:" + self.name


class TokenRing(TransitionSystem):
    IDLE, TRYING, CRITICAL = 0, 1, 2

    def __init__(self, size: int, error: int) -> None:
        self.size = size
        self.error = error
        self.state_width = size + 1
        self.name = f"token_ring(N={size},ERROR={error})"

    def initial_states(self) -> list[bytes]:
        return [bytes(self.state_width)]

    def successors(self, state: bytes) -> list[bytes]:
        holder, procs = self.decode(state)
        out = []
        for i, p in enumerate(procs):
            if p == self.IDLE:
                out.append(self._with(state, i, self.TRYING))
            elif p == self.TRYING:
                if holder == i or (self.error and i == self.size - 1):
                    out.append(self._with(state, i, self.CRITICAL))
            else:
                out.append(self._with(state, i, self.IDLE))
            if holder == i and p != self.CRITICAL:
                nxt = bytearray(state)
                nxt[0] = (i + 1) % self.size
                out.append(bytes(nxt))
        return out

    @staticmethod
    def _with(state: bytes, i: int, value: int) -> bytes:
        nxt = bytearray(state)
        nxt[i + 1] = value
        return bytes(nxt)

    def accepting(self, state: bytes) -> bool:
        return sum(1 for b in state[1:] if b == self.CRITICAL) >= 2

    def encode(self, value: tuple[int, tuple[int, ...]]) -> bytes:
        holder, procs = value
        if not 0 <= holder < self.size or len(procs) != self.size:
            raise ValueError(f"bad token ring state {value!r}")
        return bytes([holder, *procs])

    def decode(self, state: bytes) -> tuple[int, tuple[int, ...]]:
        self.check_width(state)
        if state[0] >= self.size or any(b > 2 for b in state[1:]):
            raise MalformedState(f"field out of range in {state.hex()}")
        return state[0], tuple(state[1:])

    @property
    def fingerprint(self) -> str:
        return "builtin:" + self.name


class CounterCycle(TransitionSystem):
    state_width = ID_WIDTH

    def __init__(self, n: int, reset: int, every: int) -> None:
        self.n = n
        self.reset = reset
        self.every = every
        self.name = f"counter_cycle(n={n},RESET={reset},EVERY={every})"

    def initial_states(self) -> list[bytes]:
        return [encode_id(self.n - 1)]

    def successors(self, state: bytes) -> list[bytes]:
        x = self.decode(state)
        if x > 0:
            return [encode_id(x - 1)]
        return [encode_id(self.n - 1)] if self.reset else []

    def accepting(self, state: bytes) -> bool:
        return self.decode(state) % self.every == 0

    def encode(self, value: int) -> bytes:
        if not 0 <= value < self.n:
            raise ValueError(f"counter value {value} out of range")
        return encode_id(value)

    def decode(self, state: bytes) -> int:
        x = decode_id(state)
        if x >= self.n:
            raise MalformedState(f"counter value {x} out of range")
        return x

    @property
    def fingerprint(self) -> str:
        return "builtin:" + self.name


# name -> (factory, {param: (default, lo, hi)})
_REGISTRY: dict[str, tuple[Callable[..., TransitionSystem], dict[str, tuple[int, int, int]]]] = {
    "readers_writers": (
        lambda p: ReadersWriters(p["R"], p["W"], p["ERROR"]),
        {"R": (2, 1, 12), "W": (2, 1, 12), "ERROR": (1, 0, 1)},
    ),
    "token_ring": (
        lambda p: TokenRing(p["N"], p["ERROR"]),
        {"N": (3, 2, 10), "ERROR": (0, 0, 1)},
    ),
    "counter_cycle": (
        lambda p: CounterCycle(p["n"], p["RESET"], p["EVERY"]),
        {"n": (1, 1, 1 << 20), "RESET": (1, 0, 1), "EVERY": (1, 1, 1 << 20)},
    ),
}

BUILTIN_NAMES = tuple(_REGISTRY)


def builtin_model(name: str, params: dict[str, int] | None = None) -> TransitionSystem:
    try:
        factory, schema = _REGISTRY[name]
    except KeyError:
        raise UnknownModel(
            f"unknown built-in model {name!r}; choose from {', '.join(BUILTIN_NAMES)}"
        ) from None
    params = dict(params or {})
    unknown = set(params) - set(schema)
    if unknown:
        raise ParameterError(f"{name}: unknown parameter(s) {', '.join(sorted(unknown))}")
    resolved = {}
    for key, (default, lo, hi) in schema.items():
        value = params.get(key, default)
        if not lo <= value <= hi:
            raise ParameterError(f"{name}: {key}={value} outside [{lo}, {hi}]")
        resolved[key] = value
    return factory(resolved)


def parse_builtin_spec(spec: str) -> tuple[str, dict[str, int]]:
    """Split ``name[:K=V,K=V]`` (the part after ``builtin:``) into name and params."""
    name, _, rest = spec.partition(":")
    params: dict[str, int] = {}
    for item in filter(None, rest.split(",")):
        key, eq, value = item.partition("=")
        if not eq:
            raise ParameterError(f"expected KEY=VALUE, got {item!r}")
        try:
            params[key.strip()] = int(value)
        except ValueError:
            raise ParameterError(f"{key}: {value!r} is not an integer") from None
    return name, params


def readers_writers_gcl(readers: int, writers: int, error: int) -> str:
    """GCL source describing the same system as ``readers_writers``."""
    rs = [f"r{i}" for i in range(readers)]
    ws = [f"w{j}" for j in range(writers)]
    nw = " + ".join(ws)
    nr = " + ".join(rs)
    lines = [f"# readers_writers R={readers} W={writers} ERROR={error}"]
    lines += [f"var {v}: 0..1 = 0;" for v in rs + ws]
    for v in rs:
        lines.append(f"proc reader_{v} {{ {v} == 0 && {nw} == 0 -> {v} := 1; {v} == 1 -> {v} := 0 }}")
    for v in ws:
        enter = f"{nw} == 0" if error else f"{nw} == 0 && {nr} == 0"
        lines.append(f"proc writer_{v} {{ {v} == 0 && {enter} -> {v} := 1; {v} == 1 -> {v} := 0 }}")
    lines.append(f"accept {nr} > 0 && {nw} > 0")
    return "\n".join(lines) + "\n"
