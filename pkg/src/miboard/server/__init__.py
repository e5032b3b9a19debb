"""Lobbies, live sessions, append-only logs, replay, and transports.

Importing this package stays light; the network transport (websockets)
is only pulled in by :mod:`miboard.server.app`.
"""
