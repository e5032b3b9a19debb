"""miboard: a networked multiplayer reading-strategy board game.

Subpackages: ``core`` (deterministic rules engine), ``content`` (text
packs), ``protocol`` (wire codec), ``server`` (sessions, logs, transport),
``bots`` (scripted players and the balance simulator), ``cli``.
"""

__version__ = "0.1.0"

PROTOCOL_VERSION = "miboard/1"
