"""Error hierarchy for rules, content, protocol, and server layers.

Every error carries a stable ``code`` string; the server forwards codes to
clients in ``error`` events, so codes are part of the wire contract and
must not change casually.
"""

from __future__ import annotations


class MiboardError(Exception):
    """Base class; ``code`` is the stable machine-readable identifier."""

    code = "error"

    def __init__(self, message: str = ""):
        super().__init__(message or self.__class__.__name__)


# --- game rules ---------------------------------------------------------

class GameError(MiboardError):
    code = "game_error"


class RosterSizeOutOfRange(GameError):
    code = "roster_size_out_of_range"


class DuplicatePlayerId(GameError):
    code = "duplicate_player_id"


class InvalidPack(GameError):
    code = "invalid_pack"


class WrongPhase(GameError):
    code = "wrong_phase"


class NotReader(GameError):
    code = "not_reader"


class NotCurrentPlayer(GameError):
    code = "not_current_player"


class InsufficientPoints(GameError):
    code = "insufficient_points"


class AlreadyAltered(GameError):
    code = "already_altered"


class AlreadySwapped(GameError):
    code = "already_swapped"


class EmptyExplanation(GameError):
    code = "empty_explanation"


class ReaderCannotVote(GameError):
    code = "reader_cannot_vote"


class AlreadyVoted(GameError):
    code = "already_voted"


class CardNotHeld(GameError):
    code = "card_not_held"


class InvalidTarget(GameError):
    code = "invalid_target"


class VoterSetMismatch(GameError):
    code = "voter_set_mismatch"


class UnknownPlayer(GameError):
    code = "unknown_player"


class InvalidConfig(GameError):
    code = "invalid_config"


# --- content ------------------------------------------------------------

class ContentError(MiboardError):
    code = "content_error"


class ParseError(ContentError):
    code = "parse_error"


class IndexOutOfRange(ContentError):
    code = "index_out_of_range"


class NoTargets(ContentError):
    code = "no_targets"


class EmptySentence(ContentError):
    code = "empty_sentence"


class NonMonotonicTargets(ContentError):
    code = "non_monotonic_targets"


# --- protocol codec -----------------------------------------------------

class ProtocolError(MiboardError):
    code = "protocol_error"


class UnencodableField(ProtocolError):
    code = "unencodable_field"


class OversizedLine(ProtocolError):
    code = "oversized_line"


class MalformedJson(ProtocolError):
    code = "malformed_json"


class UnknownType(ProtocolError):
    code = "unknown_type"


class MissingField(ProtocolError):
    code = "missing_field"


class BadFieldType(ProtocolError):
    code = "bad_field_type"


# --- server -------------------------------------------------------------

class ServerError(MiboardError):
    code = "server_error"


class UnknownPack(ServerError):
    code = "unknown_pack"


class UnknownLobby(ServerError):
    code = "unknown_lobby"


class LobbyFull(ServerError):
    code = "lobby_full"


class DuplicateName(ServerError):
    code = "duplicate_name"


class AlreadyStarted(ServerError):
    code = "already_started"


class NotHost(ServerError):
    code = "not_host"


class NotEnoughPlayers(ServerError):
    code = "not_enough_players"


class NotInSession(ServerError):
    code = "not_in_session"


class NotJoined(ServerError):
    code = "not_joined"


class ChatMuted(ServerError):
    code = "chat_muted"


class CorruptLog(ServerError):
    code = "corrupt_log"


class VersionMismatch(ServerError):
    code = "version_mismatch"
