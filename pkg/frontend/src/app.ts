// Application shell: wires the connection, the view-state reducer, and the
// renderer. State changes only on server events; user input only emits
// commands (the server stays authoritative).

import { Connection, type SocketFactory } from "./connection";
import type { PowerCardKind, Strategy } from "./protocol";
import { applyEnvelope, initialState, isReader, type ClientViewState } from "./state";
import { renderApp, type Actions } from "./render";

export class App {
  readonly state: ClientViewState;
  private readonly conn: Connection;
  private readonly actions: Actions;

  constructor(
    private readonly root: HTMLElement,
    serverUrl: string,
    socketFactory: SocketFactory
  ) {
    this.state = initialState();
    this.conn = new Connection(serverUrl, socketFactory, {
      onOpen: () => {
        this.state.connection = "open";
        this.render();
      },
      onClose: () => {
        this.state.connection = "closed";
        this.render();
      },
      onEnvelope: (env) => {
        applyEnvelope(this.state, env);
        this.render();
      },
    });
    this.actions = {
      join: (name, lobby) => {
        if (!name) return;
        this.state.myName = name;
        this.conn.send("join", lobby ? { name, lobby } : { name });
        this.render();
      },
      createLobby: (name) => {
        if (!name) return;
        this.state.myName = name;
        this.conn.send("join", { name });
        this.conn.send("create_lobby", {});
        this.render();
      },
      startGame: () => this.conn.send("start_game", {}),
      submitSe: (text) => {
        if (isReader(this.state) && text.trim()) this.conn.send("submit_se", { text });
      },
      alterStake: () => this.conn.send("alter_stake", {}),
      swapStrategy: () => this.conn.send("swap_strategy", {}),
      vote: (strategy: Strategy) => {
        if (isReader(this.state) || !this.state.turn) return;
        this.state.turn.myVote = strategy;
        this.conn.send("vote", { strategy });
        this.render();
      },
      ready: () => {
        if (this.state.turn) this.state.turn.ready = true;
        this.conn.send("ready", {});
        this.render();
      },
      chat: (text) => this.conn.send("chat", { text }),
      playCard: (kind: PowerCardKind, target: string | null) =>
        this.conn.send("play_power_card", target ? { kind, target } : { kind }),
      roll: () => this.conn.send("roll", {}),
      rematch: () => this.conn.send("rematch", {}),
    };
  }

  start(): void {
    this.state.connection = "connecting";
    this.conn.connect();
    this.render();
  }

  render(): void {
    renderApp(this.root, this.state, this.actions);
  }
}
