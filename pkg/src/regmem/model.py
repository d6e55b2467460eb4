"""Identifiers and messages shared by the engine and the protocols."""

from __future__ import annotations

from typing import Any, NamedTuple

from .encoding import encode

SERVER = "server"
WRITER = "writer"
READER = "reader"

VALUE_DEPENDENT = "value_dependent"
VALUE_INDEPENDENT = "value_independent"

_KIND_RANK = {SERVER: 0, WRITER: 1, READER: 2}


class ActorId(NamedTuple):
    kind: str
    index: int

    def __str__(self) -> str:
        return f"{self.kind[0]}{self.index}"

    @property
    def rank(self) -> tuple[int, int]:
        return (_KIND_RANK[self.kind], self.index)


class Channel(NamedTuple):
    """A reliable point-to-point channel, identified by its endpoints."""

    src: ActorId
    dst: ActorId

    def __str__(self) -> str:
        return f"{self.src}->{self.dst}"

    @property
    def rank(self) -> tuple:
        return (self.src.rank, self.dst.rank)

    @property
    def between_servers(self) -> bool:
        return self.src.kind == SERVER and self.dst.kind == SERVER


class Message(NamedTuple):
    src: ActorId
    dst: ActorId
    body: Any
    tag: str
    label: str

    @property
    def payload(self) -> bytes:
        return encode(self.body)

    @property
    def channel(self) -> Channel:
        return Channel(self.src, self.dst)


class Send(NamedTuple):
    """A send requested by a protocol handler, before it is tagged."""

    dst: ActorId
    body: Any
    label: str


def server(i: int) -> ActorId:
    return ActorId(SERVER, i)


def writer(i: int) -> ActorId:
    return ActorId(WRITER, i)


def reader(i: int) -> ActorId:
    return ActorId(READER, i)


def parse_actor(text: str) -> ActorId:
    kinds = {"s": SERVER, "w": WRITER, "r": READER}
    return ActorId(kinds[text[0]], int(text[1:]))
