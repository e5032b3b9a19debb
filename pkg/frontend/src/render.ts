// Screen rendering: lobby, reader screen, strategy identification, summary,
// discussion, movement board, and the winner screen. The whole app
// re-renders from state on every server event; no optimistic updates.

import {
  POWER_CARD_LABELS,
  STRATEGIES,
  STRATEGY_LABELS,
  type PowerCardKind,
  type Strategy,
} from "./protocol";
import {
  isReader,
  playerName,
  type ClientViewState,
  type Screen,
} from "./state";

export interface Actions {
  join(name: string, lobby: string | null): void;
  createLobby(name: string): void;
  startGame(): void;
  submitSe(text: string): void;
  alterStake(): void;
  swapStrategy(): void;
  vote(strategy: Strategy): void;
  ready(): void;
  chat(text: string): void;
  playCard(kind: PowerCardKind, target: string | null): void;
  roll(): void;
  rematch(): void;
}

const CHAT_OPEN_SCREENS: Screen[] = [
  "lobby",
  "summary",
  "discussion",
  "final_summary",
  "movement",
  "finished",
];

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  ...children: (Node | string)[]
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    if (key === "class") node.className = value;
    else node.setAttribute(key, value);
  }
  node.append(...children);
  return node;
}

function button(label: string, testId: string, onClick: () => void, disabled = false) {
  const b = el("button", { "data-testid": testId }, label);
  b.disabled = disabled;
  b.addEventListener("click", onClick);
  return b;
}

export function renderApp(root: HTMLElement, state: ClientViewState, actions: Actions): void {
  root.replaceChildren();
  root.append(header(state));
  const main = el("main", { "data-screen": state.screen });
  switch (state.screen) {
    case "connect":
      main.append(connectScreen(state, actions));
      break;
    case "lobby":
      main.append(lobbyScreen(state, actions));
      break;
    case "reading":
      main.append(scoreboard(state), readingScreen(state, actions));
      break;
    case "identification":
    case "revote":
      main.append(scoreboard(state), identificationScreen(state, actions));
      break;
    case "summary":
    case "final_summary":
      main.append(scoreboard(state), summaryScreen(state));
      break;
    case "discussion":
      main.append(scoreboard(state), discussionScreen(state, actions));
      break;
    case "movement":
      main.append(scoreboard(state), movementScreen(state, actions));
      break;
    case "finished":
      main.append(scoreboard(state), finishedScreen(state, actions));
      break;
  }
  root.append(main);
  if (state.screen !== "connect") root.append(chatPanel(state, actions));
  root.append(noticesPanel(state));
  if (state.connection === "closed" && state.screen !== "connect") {
    root.append(
      el("div", { class: "overlay", "data-testid": "reconnect-overlay" },
        el("p", {}, "Connection lost. Reload to reconnect."))
    );
  }
}

function header(state: ClientViewState): HTMLElement {
  const bits: HTMLElement[] = [el("h1", {}, "MiBoard")];
  if (state.packTitle) bits.push(el("span", { class: "pack" }, state.packTitle));
  if (state.lastVoided) {
    bits.push(
      el("span", { class: "voided", "data-testid": "turn-voided" },
        `${playerName(state, state.lastVoided)}'s turn was skipped`)
    );
  }
  return el("header", {}, ...bits);
}

function connectScreen(state: ClientViewState, actions: Actions): HTMLElement {
  const name = el("input", { "data-testid": "name-input", placeholder: "Your name" });
  const lobby = el("input", { "data-testid": "lobby-input", placeholder: "Lobby id (to join)" });
  if (state.myName) name.value = state.myName;
  return el(
    "section",
    { class: "connect" },
    el("p", {}, "Join a lobby or host a new game."),
    name,
    lobby,
    button("Join lobby", "join-button", () =>
      actions.join(name.value.trim(), lobby.value.trim() || null)
    ),
    button("Create lobby", "create-button", () => actions.createLobby(name.value.trim()))
  );
}

function lobbyScreen(state: ClientViewState, actions: Actions): HTMLElement {
  const lobby = state.lobby;
  if (!lobby) return el("section", {}, "Waiting for lobby state…");
  const list = el("ul", { "data-testid": "roster" });
  for (const p of lobby.players) {
    const host = p.id === lobby.host_id ? " (host)" : "";
    list.append(el("li", {}, `${p.name}${host}`));
  }
  const amHost = state.myPlayerId !== null && lobby.host_id === state.myPlayerId;
  return el(
    "section",
    { class: "lobby" },
    el("h2", {}, `Lobby ${lobby.lobby_id}`),
    el("p", {}, `Text pack: ${lobby.pack ?? "?"}`),
    list,
    button("Start game", "start-button", () => actions.startGame(),
      !amHost || lobby.players.length < 2)
  );
}

function scoreboard(state: ClientViewState): HTMLElement {
  const rows = state.players.map((p) => {
    const marks = [
      state.turn && state.turn.readerId === p.playerId ? "reader" : "",
      p.frozen ? "frozen" : "",
      p.connected ? "" : "offline",
    ]
      .filter(Boolean)
      .join(" ");
    return el(
      "tr",
      { "data-testid": `score-${p.playerId}` },
      el("td", {}, p.name + (marks ? ` [${marks}]` : "")),
      el("td", {}, String(p.points)),
      el("td", {}, `${p.position}/${state.boardLength}`),
      el("td", {}, `${p.handCount} cards`)
    );
  });
  return el("table", { class: "scoreboard" }, ...rows);
}

function contextPanel(state: ClientViewState): HTMLElement {
  const turn = state.turn!;
  const prior = el("div", { class: "context", "data-testid": "context" });
  for (const sentence of turn.context) prior.append(el("p", {}, sentence));
  return el(
    "div",
    { class: "text" },
    el("h3", {}, "Earlier text"),
    prior,
    el("h3", {}, "Target sentence"),
    el("blockquote", { "data-testid": "target-sentence" }, turn.sentence)
  );
}

function strategyBadge(state: ClientViewState): HTMLElement | null {
  // Rendered only when the server revealed it (reader view, or post-summary).
  const turn = state.turn;
  if (!turn || turn.assignedStrategy === null) return null;
  const stake = turn.stake !== null ? ` — stake ${turn.stake}` : "";
  return el(
    "p",
    { class: "assigned", "data-testid": "assigned-strategy" },
    `Your strategy: ${STRATEGY_LABELS[turn.assignedStrategy]}${stake}`
  );
}

function readingScreen(state: ClientViewState, actions: Actions): HTMLElement {
  const turn = state.turn;
  if (!turn) return el("section", {}, "Waiting for the next turn…");
  const section = el("section", { class: "reading" },
    el("h2", {}, `${playerName(state, turn.readerId)} is reading`),
    contextPanel(state));
  if (isReader(state)) {
    const badge = strategyBadge(state);
    if (badge) section.append(badge);
    const me = state.players.find((p) => p.playerId === state.myPlayerId);
    const points = me?.points ?? 0;
    const input = el("textarea", {
      "data-testid": "se-input",
      placeholder: "Write your self-explanation…",
    });
    section.append(
      input,
      button("Submit self-explanation", "se-submit", () => actions.submitSe(input.value)),
      button(`Raise the stake`, "alter-stake", () => actions.alterStake(), points < 1),
      button(`Swap strategy`, "swap-strategy", () => actions.swapStrategy(), points < 1)
    );
  } else {
    section.append(
      el("p", { class: "waiting", "data-testid": "waiting-indicator" },
        "Waiting for the reader's self-explanation…")
    );
  }
  return section;
}

function identificationScreen(state: ClientViewState, actions: Actions): HTMLElement {
  const turn = state.turn;
  if (!turn) return el("section", {}, "…");
  const round = state.screen === "revote" ? 2 : 1;
  const title = round === 2 ? "Re-vote: which strategy was used?" : "Which strategy was used?";
  const section = el("section", { class: "identification" },
    el("h2", {}, title),
    contextPanel(state),
    el("h3", {}, "Self-explanation"),
    el("blockquote", { "data-testid": "se-text" }, turn.seText ?? ""));
  const reader = isReader(state);
  const voted = turn.myVote !== null;
  const buttonsRow = el("div", { class: "votes" });
  for (const strategy of STRATEGIES) {
    buttonsRow.append(
      button(STRATEGY_LABELS[strategy], `vote-${strategy}`, () => actions.vote(strategy),
        reader || voted)
    );
  }
  section.append(buttonsRow);
  if (reader) {
    section.append(el("p", { "data-testid": "reader-waits" }, "The guessers are deciding…"));
  }
  section.append(
    el("p", { "data-testid": "vote-progress" }, `${turn.votesIn} vote(s) in`)
  );
  return section;
}

function summaryScreen(state: ClientViewState): HTMLElement {
  const summary = state.summary;
  const section = el("section", { class: "summary" });
  if (!summary) return section;
  const isFinal = state.screen === "final_summary";
  section.append(el("h2", {}, isFinal ? "Re-vote results" : "Vote results"));
  section.append(
    el("p", { "data-testid": "summary-strategy" },
      `The strategy was ${STRATEGY_LABELS[summary.assignedStrategy]} (stake ${summary.stake}).`)
  );
  if (!isFinal) {
    if (summary.unanimous) {
      section.append(
        el("p", { class: "banner", "data-testid": "agreement-bonus" },
          "Unanimous! Agreement bonus for everyone."));
    } else if (summary.majorityStrategy !== null) {
      const who = summary.readerInMajority ? "with the reader" : "without the reader";
      section.append(
        el("p", { "data-testid": "majority-note" },
          `Majority on ${STRATEGY_LABELS[summary.majorityStrategy]} (${who}).`));
    } else {
      section.append(el("p", { "data-testid": "majority-note" }, "No majority."));
    }
  }
  const votes = isFinal && state.finalSummary ? state.finalSummary.votes : summary.votes;
  const deltas = isFinal && state.finalSummary ? state.finalSummary.persuasionDeltas : summary.deltas;
  const table = el("table", { class: "reveal", "data-testid": "vote-table" });
  for (const p of state.players) {
    const vote = votes[p.playerId];
    const label =
      p.playerId === (state.turn?.readerId ?? "")
        ? "(reader)"
        : vote !== undefined
          ? STRATEGY_LABELS[vote]
          : "abstained";
    const delta = deltas[p.playerId] ?? 0;
    table.append(
      el("tr", {},
        el("td", {}, p.name),
        el("td", {}, label),
        el("td", {}, delta >= 0 ? `+${delta}` : String(delta)))
    );
  }
  section.append(table);
  return section;
}

function discussionScreen(state: ClientViewState, actions: Actions): HTMLElement {
  const ready = state.turn?.ready ?? false;
  return el(
    "section",
    { class: "discussion" },
    el("h2", {}, "Discussion"),
    el("p", {}, "Talk it out in the chat, then press ready for the re-vote."),
    button("Ready for re-vote", "ready-button", () => actions.ready(), ready)
  );
}

function boardTrack(state: ClientViewState): HTMLElement {
  const track = el("div", { class: "board", "data-testid": "board" });
  for (let cell = 0; cell <= state.boardLength; cell++) {
    const cellEl = el("div", { class: "cell", "data-cell": String(cell) });
    for (const [i, p] of state.players.entries()) {
      if (p.position === cell) {
        cellEl.append(
          el("span", { class: `token token-${i}`, "data-testid": `token-${p.playerId}` },
            p.name.slice(0, 1))
        );
      }
    }
    track.append(cellEl);
  }
  return track;
}

function movementScreen(state: ClientViewState, actions: Actions): HTMLElement {
  const movement = state.movement;
  const section = el("section", { class: "movement" }, el("h2", {}, "Board"), boardTrack(state));
  if (!movement) return section;
  const mine = movement.moverId === state.myPlayerId;
  if (movement.rolled) {
    section.append(
      el("p", { "data-testid": "die-result" }, `${playerName(state, movement.moverId)} rolled ${movement.roll}`)
    );
    if (movement.eventCard) {
      const card = movement.eventCard;
      const text =
        card.kind === "draw_power"
          ? "Event: draw a Power Card"
          : `Event: move ${card.kind === "move_forward" ? "forward" : "back"} ${card.n}`;
      section.append(el("p", { "data-testid": "event-card" }, text));
    }
  } else if (mine) {
    const controls = el("div", { class: "power-window", "data-testid": "power-window" });
    for (const kind of state.hand) {
      if (kind === "freeze_player") {
        for (const p of state.players) {
          if (p.playerId !== state.myPlayerId && !p.frozen) {
            controls.append(
              button(`Freeze ${p.name}`, `play-freeze-${p.playerId}`, () =>
                actions.playCard(kind, p.playerId))
            );
          }
        }
      } else {
        controls.append(
          button(`Play ${POWER_CARD_LABELS[kind]}`, `play-${kind}`, () =>
            actions.playCard(kind, null))
        );
      }
    }
    controls.append(button("Roll the die", "roll-button", () => actions.roll()));
    section.append(controls);
  } else {
    section.append(
      el("p", { "data-testid": "movement-waiting" },
        `${playerName(state, movement.moverId)} is moving…`)
    );
  }
  return section;
}

function finishedScreen(state: ClientViewState, actions: Actions): HTMLElement {
  const winner = state.winnerId ? playerName(state, state.winnerId) : "?";
  return el(
    "section",
    { class: "finished" },
    el("h2", { "data-testid": "winner-banner" }, `${winner} wins! Congratulations!`),
    boardTrack(state),
    el("p", { "data-testid": "rematch-count" }, `${state.rematchCount} ready for a rematch`),
    button("Rematch", "rematch-button", () => actions.rematch())
  );
}

function chatPanel(state: ClientViewState, actions: Actions): HTMLElement {
  const open = CHAT_OPEN_SCREENS.includes(state.screen);
  const log = el("div", { class: "chat-log", "data-testid": "chat-log" });
  for (const line of state.chat) {
    log.append(el("p", {}, `${line.senderName}: ${line.text}`));
  }
  const input = el("input", {
    "data-testid": "chat-input",
    placeholder: open ? "Say something…" : "Chat is muted during this phase",
  });
  input.disabled = !open;
  const send = button("Send", "chat-send", () => {
    if (input.value.trim()) {
      actions.chat(input.value);
      input.value = "";
    }
  }, !open);
  return el("aside", { class: "chat" }, el("h3", {}, "Chat"), log, input, send);
}

function noticesPanel(state: ClientViewState): HTMLElement {
  const panel = el("div", { class: "notices", "data-testid": "notices" });
  for (const notice of state.notices) {
    panel.append(el("p", { class: "notice" }, `${notice.code}: ${notice.message}`));
  }
  return panel;
}
