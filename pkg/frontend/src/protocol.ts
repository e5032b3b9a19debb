// Wire protocol mirror: envelope parsing, command encoding, event payload
// shapes. One JSON envelope per WebSocket text frame, version miboard/1.

export const PROTOCOL_VERSION = "miboard/1";

export type Strategy =
  | "comprehension_monitoring"
  | "paraphrasing"
  | "prediction"
  | "elaboration"
  | "bridging";

export const STRATEGIES: Strategy[] = [
  "comprehension_monitoring",
  "paraphrasing",
  "prediction",
  "elaboration",
  "bridging",
];

export const STRATEGY_LABELS: Record<Strategy, string> = {
  comprehension_monitoring: "Comprehension Monitoring",
  paraphrasing: "Paraphrasing",
  prediction: "Prediction",
  elaboration: "Elaboration",
  bridging: "Bridging",
};

export type PowerCardKind = "extra_turn" | "freeze_player" | "extra_draw";

export const POWER_CARD_LABELS: Record<PowerCardKind, string> = {
  extra_turn: "Extra Turn",
  freeze_player: "Freeze Player",
  extra_draw: "Extra Draw",
};

export interface EventCard {
  kind: "move_forward" | "move_backward" | "draw_power";
  n: number;
}

export interface Envelope {
  type: string;
  payload: Record<string, unknown>;
  seq?: number;
  req?: string;
}

/** Parse one inbound frame. Returns null for anything malformed; unknown
 * types pass through (the reducer ignores what it does not know). */
export function decodeEnvelope(text: string): Envelope | null {
  let obj: unknown;
  try {
    obj = JSON.parse(text);
  } catch {
    return null;
  }
  if (typeof obj !== "object" || obj === null || Array.isArray(obj)) return null;
  const record = obj as Record<string, unknown>;
  if (typeof record.type !== "string") return null;
  const payload =
    typeof record.payload === "object" && record.payload !== null && !Array.isArray(record.payload)
      ? (record.payload as Record<string, unknown>)
      : {};
  const env: Envelope = { type: record.type, payload };
  if (typeof record.seq === "number") env.seq = record.seq;
  if (typeof record.req === "string") env.req = record.req;
  return env;
}

function sortedStringify(value: unknown): string {
  if (value === null || typeof value !== "object") return JSON.stringify(value);
  if (Array.isArray(value)) return `[${value.map(sortedStringify).join(",")}]`;
  const entries = Object.entries(value as Record<string, unknown>)
    .sort(([a], [b]) => (a < b ? -1 : a > b ? 1 : 0))
    .map(([k, v]) => `${JSON.stringify(k)}:${sortedStringify(v)}`);
  return `{${entries.join(",")}}`;
}

/** Encode a client command with canonical key order. */
export function encodeCommand(type: string, payload: object, req: string): string {
  return sortedStringify({ type, payload, req, v: PROTOCOL_VERSION });
}

// --- event payload shapes (server -> client) -------------------------------

export interface LobbyPlayer {
  id: string;
  name: string;
}

export interface LobbyStateEvent {
  lobby_id: string;
  host_id: string;
  players: LobbyPlayer[];
  config: Record<string, unknown>;
  pack: string | null;
  state: "waiting" | "in_game";
}

export interface PlayerSnapshot {
  player_id: string;
  display_name: string;
  points: number;
  token_position: number;
  hand_count: number;
  frozen: boolean;
  connected: boolean;
}

export interface GameStartedEvent {
  snapshot: {
    board_length: number;
    phase: string;
    reader_id: string;
    pack_title: string;
    players: PlayerSnapshot[];
  };
}

export interface TurnAssignedEvent {
  reader_id: string;
  target_index: number;
  sentence: string;
  context: string[];
  assigned_strategy: Strategy | null;
  stake: number | null;
}

export interface StakeAlteredEvent {
  player_id: string;
  points: number;
  stake: number | null;
}

export interface StrategySwappedEvent {
  player_id: string;
  points: number;
  assigned_strategy: Strategy | null;
  stake: number | null;
}

export interface SePostedEvent {
  reader_id: string;
  text: string;
}

export interface VoteRecordedEvent {
  round: number;
  voter_count: number;
}

export interface SummaryRevealedEvent {
  assigned_strategy: Strategy;
  stake: number;
  votes: Record<string, Strategy>;
  majority_strategy: Strategy | null;
  reader_in_majority: boolean;
  unanimous: boolean;
  deltas: Record<string, number>;
  points: Record<string, number>;
}

export interface FinalSummaryRevealedEvent {
  votes: Record<string, Strategy>;
  persuasion_deltas: Record<string, number>;
  points: Record<string, number>;
}

export interface MovementWindowEvent {
  mover_id: string;
}

export interface PowerCardPlayedEvent {
  player_id: string;
  kind: PowerCardKind;
  target_id: string | null;
  points: Record<string, number>;
  drawn: PowerCardKind | null;
}

export interface MovementResolvedEvent {
  mover_id: string;
  roll: number;
  event_card: EventCard | null;
  positions: Record<string, number>;
  power_drawn: PowerCardKind | null;
}

export interface TurnVoidedEvent {
  reader_id: string;
}

export interface GameOverEvent {
  winner_id: string;
  points: Record<string, number>;
  positions: Record<string, number>;
}

export interface ChatRelayedEvent {
  sender_id: string;
  sender_name: string;
  text: string;
}

export interface RematchRecordedEvent {
  count: number;
}

export interface PlayerConnectionEvent {
  player_id: string;
  connected: boolean;
}

export interface ErrorEvent {
  code: string;
  message: string;
  request_id: string | null;
}
