"""Token-ring termination detection (Safra's counting algorithm).

Classic rules: every worker counts STATE messages sent minus received and
turns black on receipt; the initiator (worker 0) sends a white token with
q=0 around the ring ``i -> (i+1) % N``. Each idle worker adds its count,
blackens the token if it is black itself, whitens itself and forwards. Back
at the initiator, a white token over a white initiator with ``q + count == 0``
means no work and no message remains anywhere.

Additions used by the MAP workers:

* the token AND-accumulates "no accepting state dominated this iteration"
  and OR-accumulates "a cycle was found" (with the first witness seen), so
  the initiator can decide between ITERATE and TERMINATE on detection;
* counts, colors and the token are scoped to one iteration (``reset``);
* failed probes are re-initiated immediately;
* tokens are only handled when the worker's control queue and work stack
  are empty (enforced by the caller).
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import IntEnum


class Color(IntEnum):
    WHITE = 0
    BLACK = 1


@dataclass(frozen=True)
class Token:
    color: Color = Color.WHITE
    q: int = 0
    dominated_zero: bool = True
    cycle_found: bool = False
    witness: bytes | None = None


class SafraLocal:
    def __init__(self, worker_id: int, workers: int) -> None:
        self.worker_id = worker_id
        self.workers = workers
        self.count = 0
        self.color = Color.WHITE
        self.initiations = 0

    @property
    def is_initiator(self) -> bool:
        return self.worker_id == 0

    @property
    def successor(self) -> int:
        return (self.worker_id + 1) % self.workers

    def on_send(self, k: int = 1) -> None:
        self.count += k

    def on_receive(self, k: int = 1) -> None:
        self.count -= k
        self.color = Color.BLACK

    def reset(self) -> None:
        self.count = 0
        self.color = Color.WHITE

    def start_token(self) -> Token:
        """Placeholder probe that always fails, so the first real probe is
        launched the first time the initiator goes idle."""
        return Token(color=Color.BLACK)

    def _fold(self, t: Token, dominated_zero: bool, witness: bytes | None) -> Token:
        found = t.cycle_found or witness is not None
        return replace(
            t,
            q=t.q + self.count,
            color=Color.BLACK if self.color is Color.BLACK else t.color,
            dominated_zero=t.dominated_zero and dominated_zero,
            cycle_found=found,
            witness=t.witness if t.witness is not None else witness,
        )

    def handle_token(
        self, token: Token, dominated_zero: bool, witness: bytes | None = None
    ) -> tuple[bool, Token]:
        """Process a held token.

        Returns ``(True, summary)`` when the initiator detects termination, in
        which case ``summary`` includes the initiator's own contribution.
        Otherwise returns ``(False, token)`` with the token to forward to
        ``self.successor``.
        """
        if not self.is_initiator:
            out = self._fold(token, dominated_zero, witness)
            self.color = Color.WHITE
            return False, out
        if (
            token.color is Color.WHITE
            and self.color is Color.WHITE
            and token.q + self.count == 0
        ):
            summary = replace(self._fold(token, dominated_zero, witness), q=0)
            return True, summary
        self.color = Color.WHITE
        self.initiations += 1
        return False, Token()
