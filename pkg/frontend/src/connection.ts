// WebSocket wrapper: one envelope per text frame, inbound frames decoded
// and handed to the app in arrival order. The socket constructor is
// injectable so tests can substitute a scripted double.

import { decodeEnvelope, encodeCommand, type Envelope } from "./protocol";

export interface SocketLike {
  send(data: string): void;
  close(): void;
  onopen: (() => void) | null;
  onclose: (() => void) | null;
  onmessage: ((event: { data: unknown }) => void) | null;
}

export type SocketFactory = (url: string) => SocketLike;

export class Connection {
  private socket: SocketLike | null = null;
  private reqCounter = 0;

  constructor(
    private readonly url: string,
    private readonly factory: SocketFactory,
    private readonly handlers: {
      onOpen(): void;
      onClose(): void;
      onEnvelope(env: Envelope): void;
    }
  ) {}

  connect(): void {
    const socket = this.factory(this.url);
    this.socket = socket;
    socket.onopen = () => this.handlers.onOpen();
    socket.onclose = () => this.handlers.onClose();
    socket.onmessage = (event) => {
      if (typeof event.data !== "string") return;
      const env = decodeEnvelope(event.data);
      if (env !== null) this.handlers.onEnvelope(env);
    };
  }

  send(type: string, payload: object): string {
    const req = `r${++this.reqCounter}`;
    this.socket?.send(encodeCommand(type, payload, req));
    return req;
  }

  close(): void {
    this.socket?.close();
  }
}
