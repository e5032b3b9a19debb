// Client view state: a mirror of the game projected from server events.
// Events are applied strictly in seq order (out-of-order arrivals are
// buffered), and nothing is ever inferred locally - in particular the
// assigned strategy exists in this state only if the server sent it.

import type {
  ChatRelayedEvent,
  Envelope,
  ErrorEvent,
  EventCard,
  FinalSummaryRevealedEvent,
  GameOverEvent,
  GameStartedEvent,
  LobbyStateEvent,
  MovementResolvedEvent,
  MovementWindowEvent,
  PlayerConnectionEvent,
  PowerCardKind,
  PowerCardPlayedEvent,
  RematchRecordedEvent,
  SePostedEvent,
  StakeAlteredEvent,
  Strategy,
  StrategySwappedEvent,
  SummaryRevealedEvent,
  TurnAssignedEvent,
  TurnVoidedEvent,
  VoteRecordedEvent,
} from "./protocol";

export type Screen =
  | "connect"
  | "lobby"
  | "reading"
  | "identification"
  | "summary"
  | "discussion"
  | "revote"
  | "final_summary"
  | "movement"
  | "finished";

export interface PlayerView {
  playerId: string;
  name: string;
  points: number;
  position: number;
  handCount: number;
  frozen: boolean;
  connected: boolean;
}

export interface TurnView {
  readerId: string;
  targetIndex: number;
  sentence: string;
  context: string[];
  assignedStrategy: Strategy | null; // null until the server reveals it
  stake: number | null;
  seText: string | null;
  round: 1 | 2;
  votesIn: number;
  myVote: Strategy | null;
  ready: boolean;
}

export interface SummaryView {
  assignedStrategy: Strategy;
  stake: number;
  votes: Record<string, Strategy>;
  majorityStrategy: Strategy | null;
  readerInMajority: boolean;
  unanimous: boolean;
  deltas: Record<string, number>;
}

export interface FinalSummaryView {
  votes: Record<string, Strategy>;
  persuasionDeltas: Record<string, number>;
}

export interface MovementView {
  moverId: string;
  roll: number | null;
  eventCard: EventCard | null;
  rolled: boolean;
}

export interface ChatLine {
  senderId: string;
  senderName: string;
  text: string;
}

export interface Notice {
  code: string;
  message: string;
  requestId: string | null;
}

export interface ClientViewState {
  connection: "idle" | "connecting" | "open" | "closed";
  screen: Screen;
  myName: string | null;
  myPlayerId: string | null;
  lobby: LobbyStateEvent | null;
  boardLength: number;
  packTitle: string | null;
  players: PlayerView[];
  turn: TurnView | null;
  summary: SummaryView | null;
  finalSummary: FinalSummaryView | null;
  movement: MovementView | null;
  hand: PowerCardKind[]; // own hand, mirrored from private draw fields
  chat: ChatLine[];
  notices: Notice[];
  rematchCount: number;
  winnerId: string | null;
  lastVoided: string | null;
  // seq-order gate
  lastSeq: number;
  buffered: Map<number, Envelope>;
}

export function initialState(): ClientViewState {
  return {
    connection: "idle",
    screen: "connect",
    myName: null,
    myPlayerId: null,
    lobby: null,
    boardLength: 0,
    packTitle: null,
    players: [],
    turn: null,
    summary: null,
    finalSummary: null,
    movement: null,
    hand: [],
    chat: [],
    notices: [],
    rematchCount: 0,
    winnerId: null,
    lastVoided: null,
    lastSeq: 0,
    buffered: new Map(),
  };
}

export function isReader(state: ClientViewState): boolean {
  return state.turn !== null && state.turn.readerId === state.myPlayerId;
}

export function player(state: ClientViewState, id: string): PlayerView | undefined {
  return state.players.find((p) => p.playerId === id);
}

export function playerName(state: ClientViewState, id: string): string {
  return player(state, id)?.name ?? id;
}

/** Apply an envelope respecting seq order; buffers gaps, drops replays. */
export function applyEnvelope(state: ClientViewState, env: Envelope): void {
  if (env.seq === undefined) {
    applyEvent(state, env);
    return;
  }
  if (env.seq <= state.lastSeq) return;
  if (env.seq !== state.lastSeq + 1) {
    state.buffered.set(env.seq, env);
    return;
  }
  state.lastSeq = env.seq;
  applyEvent(state, env);
  let next: Envelope | undefined;
  while ((next = state.buffered.get(state.lastSeq + 1)) !== undefined) {
    state.buffered.delete(state.lastSeq + 1);
    state.lastSeq += 1;
    applyEvent(state, next);
  }
}

function applyPoints(state: ClientViewState, points: Record<string, number>): void {
  for (const p of state.players) {
    if (points[p.playerId] !== undefined) p.points = points[p.playerId];
  }
}

function applyPositions(state: ClientViewState, positions: Record<string, number>): void {
  for (const p of state.players) {
    if (positions[p.playerId] !== undefined) p.position = positions[p.playerId];
  }
}

function applyEvent(state: ClientViewState, env: Envelope): void {
  switch (env.type) {
    case "lobby_state": {
      const lobby = env.payload as unknown as LobbyStateEvent;
      state.lobby = lobby;
      if (state.screen === "connect" || state.screen === "lobby") {
        state.screen = "lobby";
        if (state.myName !== null) {
          state.myPlayerId =
            lobby.players.find((p) => p.name === state.myName)?.id ?? state.myPlayerId;
        }
      }
      break;
    }
    case "game_started": {
      const { snapshot } = env.payload as unknown as GameStartedEvent;
      state.boardLength = snapshot.board_length;
      state.packTitle = snapshot.pack_title;
      state.players = snapshot.players.map((p) => ({
        playerId: p.player_id,
        name: p.display_name,
        points: p.points,
        position: p.token_position,
        handCount: p.hand_count,
        frozen: p.frozen,
        connected: p.connected,
      }));
      if (state.myName !== null) {
        state.myPlayerId =
          snapshot.players.find((p) => p.display_name === state.myName)?.player_id ??
          state.myPlayerId;
      }
      state.hand = [];
      state.summary = null;
      state.finalSummary = null;
      state.movement = null;
      state.winnerId = null;
      state.rematchCount = 0;
      state.screen = "reading";
      break;
    }
    case "turn_assigned": {
      const turn = env.payload as unknown as TurnAssignedEvent;
      state.turn = {
        readerId: turn.reader_id,
        targetIndex: turn.target_index,
        sentence: turn.sentence,
        context: turn.context,
        assignedStrategy: turn.assigned_strategy,
        stake: turn.stake,
        seText: null,
        round: 1,
        votesIn: 0,
        myVote: null,
        ready: false,
      };
      state.summary = null;
      state.finalSummary = null;
      state.movement = null;
      state.lastVoided = null;
      state.screen = "reading";
      break;
    }
    case "stake_altered": {
      const ev = env.payload as unknown as StakeAlteredEvent;
      const p = player(state, ev.player_id);
      if (p) p.points = ev.points;
      if (state.turn && ev.stake !== null) state.turn.stake = ev.stake;
      break;
    }
    case "strategy_swapped": {
      const ev = env.payload as unknown as StrategySwappedEvent;
      const p = player(state, ev.player_id);
      if (p) p.points = ev.points;
      if (state.turn) {
        if (ev.assigned_strategy !== null) state.turn.assignedStrategy = ev.assigned_strategy;
        if (ev.stake !== null) state.turn.stake = ev.stake;
      }
      break;
    }
    case "se_posted": {
      const ev = env.payload as unknown as SePostedEvent;
      if (state.turn) {
        state.turn.seText = ev.text;
        state.turn.round = 1;
        state.turn.votesIn = 0;
        state.turn.myVote = null;
      }
      state.screen = "identification";
      break;
    }
    case "vote_recorded": {
      const ev = env.payload as unknown as VoteRecordedEvent;
      if (state.turn) state.turn.votesIn = ev.voter_count;
      break;
    }
    case "summary_revealed": {
      const ev = env.payload as unknown as SummaryRevealedEvent;
      state.summary = {
        assignedStrategy: ev.assigned_strategy,
        stake: ev.stake,
        votes: ev.votes,
        majorityStrategy: ev.majority_strategy,
        readerInMajority: ev.reader_in_majority,
        unanimous: ev.unanimous,
        deltas: ev.deltas,
      };
      if (state.turn) {
        state.turn.assignedStrategy = ev.assigned_strategy;
        state.turn.stake = ev.stake;
      }
      applyPoints(state, ev.points);
      state.screen = "summary";
      break;
    }
    case "discussion_started": {
      if (state.turn) state.turn.ready = false;
      state.screen = "discussion";
      break;
    }
    case "revote_started": {
      if (state.turn) {
        state.turn.round = 2;
        state.turn.votesIn = 0;
        state.turn.myVote = null;
      }
      state.screen = "revote";
      break;
    }
    case "final_summary_revealed": {
      const ev = env.payload as unknown as FinalSummaryRevealedEvent;
      state.finalSummary = { votes: ev.votes, persuasionDeltas: ev.persuasion_deltas };
      applyPoints(state, ev.points);
      state.screen = "final_summary";
      break;
    }
    case "movement_window": {
      const ev = env.payload as unknown as MovementWindowEvent;
      state.movement = { moverId: ev.mover_id, roll: null, eventCard: null, rolled: false };
      state.screen = "movement";
      break;
    }
    case "power_card_played": {
      const ev = env.payload as unknown as PowerCardPlayedEvent;
      applyPoints(state, ev.points);
      const p = player(state, ev.player_id);
      if (p) p.handCount = Math.max(0, p.handCount - 1);
      if (ev.player_id === state.myPlayerId) {
        const i = state.hand.indexOf(ev.kind);
        if (i >= 0) state.hand.splice(i, 1);
      }
      if (ev.kind === "freeze_player" && ev.target_id !== null) {
        const target = player(state, ev.target_id);
        if (target) target.frozen = true;
      }
      if (ev.drawn !== null && ev.player_id === state.myPlayerId) {
        state.hand.push(ev.drawn);
      }
      if (ev.drawn !== null && p) p.handCount += 1;
      break;
    }
    case "movement_resolved": {
      const ev = env.payload as unknown as MovementResolvedEvent;
      applyPositions(state, ev.positions);
      if (state.movement && state.movement.moverId === ev.mover_id) {
        state.movement.roll = ev.roll;
        state.movement.eventCard = ev.event_card;
        state.movement.rolled = true;
      }
      if (ev.power_drawn !== null && ev.mover_id === state.myPlayerId) {
        state.hand.push(ev.power_drawn);
      }
      break;
    }
    case "turn_voided": {
      const ev = env.payload as unknown as TurnVoidedEvent;
      state.lastVoided = ev.reader_id;
      break;
    }
    case "game_over": {
      const ev = env.payload as unknown as GameOverEvent;
      state.winnerId = ev.winner_id;
      applyPoints(state, ev.points);
      applyPositions(state, ev.positions);
      state.rematchCount = 0;
      state.screen = "finished";
      break;
    }
    case "chat_relayed": {
      const ev = env.payload as unknown as ChatRelayedEvent;
      state.chat.push({ senderId: ev.sender_id, senderName: ev.sender_name, text: ev.text });
      if (state.chat.length > 200) state.chat.shift();
      break;
    }
    case "rematch_recorded": {
      state.rematchCount = (env.payload as unknown as RematchRecordedEvent).count;
      break;
    }
    case "player_connection": {
      const ev = env.payload as unknown as PlayerConnectionEvent;
      const p = player(state, ev.player_id);
      if (p) p.connected = ev.connected;
      break;
    }
    case "error": {
      const ev = env.payload as unknown as ErrorEvent;
      state.notices.push({ code: ev.code, message: ev.message, requestId: ev.request_id });
      if (state.notices.length > 5) state.notices.shift();
      break;
    }
    default:
      // Unknown event types are ignored for forward compatibility.
      break;
  }
}
