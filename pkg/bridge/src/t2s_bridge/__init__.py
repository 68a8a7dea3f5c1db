"""In-process binding of the t2s serializer and incremental checker.

A beam-search loop holds one session per hypothesis and calls
:func:`bridge_feed` with each candidate continuation; :func:`bridge_fork`
clones a session when a hypothesis splits. Verdicts cross the boundary as
the plain strings ``"accept"``, ``"reject"`` and ``"complete"`` so callers
need no types from this package.

Sessions are single-owner: distinct sessions may be used from different
threads, but one session must not be shared.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from t2s import (
    DescriptionStore,
    SchemaCatalog,
    checker,
    load_catalog_map,
    serialize_baseline,
    serialize_fk,
    serialize_sd,
)

__all__ = [
    "BridgeError",
    "UnknownDbId",
    "ClosedSession",
    "BridgeHandle",
    "BridgeSession",
    "bridge_init",
    "bridge_serialize",
    "bridge_new_session",
    "bridge_feed",
    "bridge_fork",
    "bridge_close",
]

__version__ = "0.1.0"


class BridgeError(Exception):
    """Base class for binding-level failures."""


class UnknownDbId(BridgeError):
    """The requested database id is not in the loaded catalog."""


class ClosedSession(BridgeError):
    """Operation on a session after bridge_close."""


@dataclass
class BridgeHandle:
    catalogs: dict[str, SchemaCatalog]
    descriptions: DescriptionStore | None = None

    def catalog(self, db_id: str) -> SchemaCatalog:
        catalog = self.catalogs.get(db_id)
        if catalog is None:
            raise UnknownDbId(db_id)
        return catalog


@dataclass
class BridgeSession:
    """One decode hypothesis; wraps a checker state plus its origin."""

    db_id: str
    level: str
    _state: checker.CheckerState = field(repr=False)
    closed: bool = False

    def _require_open(self) -> None:
        if self.closed:
            raise ClosedSession(f"session for {self.db_id!r} is closed")


def bridge_init(tables_path: str, descriptions_path: str | None = None) -> BridgeHandle:
    """Load catalogs (and optionally descriptions) once, up front."""
    descriptions = (
        DescriptionStore.load(descriptions_path) if descriptions_path else None
    )
    return BridgeHandle(load_catalog_map(tables_path), descriptions)


def bridge_serialize(
    handle: BridgeHandle, question: str, db_id: str, scheme: str = "baseline"
) -> str:
    """Serialized model input, byte-identical to the CLI serialize output."""
    catalog = handle.catalog(db_id)
    if scheme == "baseline":
        return serialize_baseline(question, catalog).text
    if scheme == "fk":
        return serialize_fk(question, catalog).text
    if scheme == "sd":
        if handle.descriptions is None:
            raise BridgeError("scheme 'sd' needs descriptions loaded at bridge_init")
        return serialize_sd(question, catalog, handle.descriptions).text
    raise BridgeError(f"unknown scheme {scheme!r}")


def bridge_new_session(
    handle: BridgeHandle, db_id: str, level: str = "schema"
) -> BridgeSession:
    catalog = handle.catalog(db_id)
    return BridgeSession(db_id, level, checker.new_checker(catalog, level=level))


def bridge_feed(session: BridgeSession, fragment: str) -> str:
    """Consume a fragment; returns "accept", "reject" or "complete"."""
    session._require_open()
    return checker.feed(session._state, fragment).value


def bridge_fork(session: BridgeSession) -> BridgeSession:
    """Independent copy sharing the fed history, for hypothesis splits."""
    session._require_open()
    return BridgeSession(session.db_id, session.level, checker.fork(session._state))


def bridge_close(session: BridgeSession) -> None:
    """Release the session; further feed/fork calls raise ClosedSession."""
    session.closed = True
