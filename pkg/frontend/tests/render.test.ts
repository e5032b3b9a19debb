// Rendering coverage: the golden transcript renders after every event with
// the guesser invariant intact, and every catalogue event type renders
// without error, including reader-perspective views.

import { beforeEach, describe, expect, it } from "vitest";

import { decodeEnvelope, type Envelope } from "../src/protocol";
import { renderApp, type Actions } from "../src/render";
import { applyEnvelope, initialState, type ClientViewState } from "../src/state";
import fixture from "./fixtures/scripted_game.json";

const noopActions: Actions = {
  join: () => {},
  createLobby: () => {},
  startGame: () => {},
  submitSe: () => {},
  alterStake: () => {},
  swapStrategy: () => {},
  vote: () => {},
  ready: () => {},
  chat: () => {},
  playCard: () => {},
  roll: () => {},
  rematch: () => {},
};

let root: HTMLElement;

beforeEach(() => {
  document.body.innerHTML = '<div id="app"></div>';
  root = document.getElementById("app")!;
});

function strategyVisibleOutsideButtons(): boolean {
  return root.querySelector('[data-testid="assigned-strategy"]') !== null;
}

describe("golden transcript rendering", () => {
  it("renders every event and every screen without error", () => {
    const state = initialState();
    state.myName = fixture.myName;
    state.connection = "open";
    const seenScreens = new Set<string>();
    renderApp(root, state, noopActions);
    for (const step of fixture.steps) {
      if (step.dir !== "recv") continue;
      applyEnvelope(state, decodeEnvelope(step.line)!);
      renderApp(root, state, noopActions);
      seenScreens.add(state.screen);
      expect(root.querySelector("main")).not.toBeNull();
      // guesser view: assigned strategy never rendered pre-summary
      if (
        state.turn !== null &&
        state.turn.readerId !== state.myPlayerId &&
        (state.screen === "reading" || state.screen === "identification")
      ) {
        expect(strategyVisibleOutsideButtons()).toBe(false);
      }
    }
    expect([...seenScreens].sort()).toEqual(
      [
        "discussion",
        "final_summary",
        "finished",
        "identification",
        "lobby",
        "movement",
        "reading",
        "revote",
        "summary",
      ].sort()
    );
  });

  it("shows the unanimity banner on unanimous summaries", () => {
    const state = initialState();
    state.myName = "Bea";
    state.connection = "open";
    apply(state, "game_started", { snapshot: twoPlayerSnapshot() }, 1);
    apply(state, "turn_assigned", guesserTurn(), 2);
    apply(
      state,
      "summary_revealed",
      {
        assigned_strategy: "paraphrasing",
        stake: 4,
        votes: { p2: "paraphrasing" },
        majority_strategy: "paraphrasing",
        reader_in_majority: true,
        unanimous: true,
        deltas: { p1: 9, p2: 7 },
        points: { p1: 9, p2: 7 },
      },
      3
    );
    renderApp(root, state, noopActions);
    expect(root.querySelector('[data-testid="agreement-bonus"]')).not.toBeNull();
  });
});

function apply(state: ClientViewState, type: string, payload: Record<string, unknown>, seq: number) {
  const env: Envelope = { type, payload, seq };
  applyEnvelope(state, env);
}

function twoPlayerSnapshot() {
  return {
    board_length: 10,
    phase: "reading",
    reader_id: "p1",
    pack_title: "T",
    players: [
      { player_id: "p1", display_name: "Ada", points: 0, token_position: 0, hand_count: 0, frozen: false, connected: true },
      { player_id: "p2", display_name: "Bea", points: 0, token_position: 0, hand_count: 0, frozen: false, connected: true },
    ],
  };
}

function guesserTurn() {
  return {
    reader_id: "p1",
    target_index: 0,
    sentence: "Target sentence.",
    context: ["Earlier sentence."],
    assigned_strategy: null,
    stake: null,
  };
}

describe("role-gated rendering", () => {
  it("hides the SE input from guessers and shows a waiting indicator", () => {
    const state = initialState();
    state.myName = "Bea";
    apply(state, "game_started", { snapshot: twoPlayerSnapshot() }, 1);
    apply(state, "turn_assigned", guesserTurn(), 2);
    renderApp(root, state, noopActions);
    expect(root.querySelector('[data-testid="se-input"]')).toBeNull();
    expect(root.querySelector('[data-testid="waiting-indicator"]')).not.toBeNull();
    expect(strategyVisibleOutsideButtons()).toBe(false);
  });

  it("shows the reader the strategy, the SE input, and spend buttons", () => {
    const state = initialState();
    state.myName = "Ada";
    apply(state, "game_started", { snapshot: twoPlayerSnapshot() }, 1);
    apply(
      state,
      "turn_assigned",
      { ...guesserTurn(), assigned_strategy: "bridging", stake: 10 },
      2
    );
    renderApp(root, state, noopActions);
    const badge = root.querySelector('[data-testid="assigned-strategy"]');
    expect(badge?.textContent).toContain("Bridging");
    expect(badge?.textContent).toContain("10");
    expect(root.querySelector('[data-testid="se-input"]')).not.toBeNull();
    expect(root.querySelector('[data-testid="alter-stake"]')).not.toBeNull();
    expect(root.querySelector('[data-testid="swap-strategy"]')).not.toBeNull();
  });

  it("disables vote buttons for the reader during identification", () => {
    const state = initialState();
    state.myName = "Ada";
    apply(state, "game_started", { snapshot: twoPlayerSnapshot() }, 1);
    apply(state, "turn_assigned", { ...guesserTurn(), assigned_strategy: "bridging", stake: 10 }, 2);
    apply(state, "se_posted", { reader_id: "p1", text: "my explanation" }, 3);
    renderApp(root, state, noopActions);
    const buttons = root.querySelectorAll<HTMLButtonElement>('button[data-testid^="vote-"]');
    expect(buttons.length).toBe(5);
    for (const b of buttons) expect(b.disabled).toBe(true);
    expect(root.querySelector('[data-testid="reader-waits"]')).not.toBeNull();
  });

  it("mutes chat during reading and identification, opens it in discussion", () => {
    const state = initialState();
    state.myName = "Bea";
    apply(state, "game_started", { snapshot: twoPlayerSnapshot() }, 1);
    apply(state, "turn_assigned", guesserTurn(), 2);
    renderApp(root, state, noopActions);
    let input = root.querySelector<HTMLInputElement>('[data-testid="chat-input"]')!;
    expect(input.disabled).toBe(true);
    apply(state, "se_posted", { reader_id: "p1", text: "x" }, 3);
    renderApp(root, state, noopActions);
    input = root.querySelector<HTMLInputElement>('[data-testid="chat-input"]')!;
    expect(input.disabled).toBe(true);
    apply(
      state,
      "summary_revealed",
      {
        assigned_strategy: "bridging",
        stake: 10,
        votes: { p2: "elaboration" },
        majority_strategy: null,
        reader_in_majority: false,
        unanimous: false,
        deltas: { p1: 0, p2: 0 },
        points: { p1: 0, p2: 0 },
      },
      4
    );
    apply(state, "discussion_started", {}, 5);
    renderApp(root, state, noopActions);
    input = root.querySelector<HTMLInputElement>('[data-testid="chat-input"]')!;
    expect(input.disabled).toBe(false);
  });

  it("renders the power-card window with freeze targets and the board", () => {
    const state = initialState();
    state.myName = "Bea";
    apply(state, "game_started", { snapshot: twoPlayerSnapshot() }, 1);
    apply(state, "movement_window", { mover_id: "p2" }, 2);
    apply(
      state,
      "movement_resolved",
      { mover_id: "p2", roll: 2, event_card: { kind: "draw_power", n: 0 }, positions: { p2: 2 }, power_drawn: "freeze_player" },
      3
    );
    // next turn, my movement window again, now holding a freeze card
    apply(state, "turn_assigned", { ...guesserTurn(), reader_id: "p2", assigned_strategy: "prediction", stake: 6 }, 4);
    apply(state, "movement_window", { mover_id: "p2" }, 5);
    renderApp(root, state, noopActions);
    expect(root.querySelector('[data-testid="board"]')).not.toBeNull();
    expect(root.querySelector('[data-testid="play-freeze-p1"]')).not.toBeNull();
    expect(root.querySelector('[data-testid="roll-button"]')).not.toBeNull();
  });

  it("renders every remaining catalogue event without error", () => {
    const state = initialState();
    state.myName = "Bea";
    apply(state, "game_started", { snapshot: twoPlayerSnapshot() }, 1);
    apply(state, "turn_assigned", guesserTurn(), 2);
    const extras: [string, Record<string, unknown>][] = [
      ["stake_altered", { player_id: "p1", points: 3, stake: null }],
      ["strategy_swapped", { player_id: "p1", points: 1, assigned_strategy: null, stake: null }],
      ["vote_recorded", { round: 1, voter_count: 1 }],
      ["turn_voided", { reader_id: "p1" }],
      ["player_connection", { player_id: "p1", connected: false }],
      ["rematch_recorded", { count: 1 }],
      ["chat_relayed", { sender_id: "p1", sender_name: "Ada", text: "gg" }],
      ["error", { code: "wrong_phase", message: "not now", request_id: "r4" }],
      [
        "power_card_played",
        { player_id: "p1", kind: "extra_turn", target_id: null, points: { p1: 0 }, drawn: null },
      ],
      ["game_over", { winner_id: "p1", points: { p1: 12 }, positions: { p1: 10 } }],
    ];
    let seq = 3;
    for (const [type, payload] of extras) {
      apply(state, type, payload, seq++);
      renderApp(root, state, noopActions);
      expect(root.querySelector("main")).not.toBeNull();
    }
    expect(root.querySelector('[data-testid="winner-banner"]')?.textContent).toContain("Ada");
    expect(root.querySelector('[data-testid="notices"]')?.textContent).toContain("wrong_phase");
  });
});
