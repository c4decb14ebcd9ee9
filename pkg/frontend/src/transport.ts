// WebSocket transport with visible reconnect state. The socket constructor
// is injected so node tests can pass the `ws` implementation.

import { WireMessage, decodeMessage, encodeMessage } from "./protocol.js";

export type ConnectionState = "connecting" | "connected" | "reconnecting" | "closed";

export interface SocketLike {
  send(data: string): void;
  close(): void;
  addEventListener(type: "open" | "close" | "error", cb: () => void): void;
  addEventListener(type: "message", cb: (ev: { data: unknown }) => void): void;
}

export type SocketFactory = (url: string) => SocketLike;

export interface Transport {
  send(msg: WireMessage): void;
  onMessage(cb: (msg: WireMessage) => void): void;
  onState(cb: (state: ConnectionState) => void): void;
  close(): void;
}

const RECONNECT_DELAY_MS = 1000;

export class WebSocketTransport implements Transport {
  private socket: SocketLike | null = null;
  private state: ConnectionState = "connecting";
  private messageCbs: Array<(msg: WireMessage) => void> = [];
  private stateCbs: Array<(state: ConnectionState) => void> = [];
  private closed = false;
  // messages sent while (re)connecting are queued, never dropped silently
  private pending: string[] = [];

  constructor(
    private readonly url: string,
    private readonly factory: SocketFactory,
  ) {
    this.connect();
  }

  private setState(state: ConnectionState): void {
    this.state = state;
    for (const cb of this.stateCbs) cb(state);
  }

  private connect(): void {
    this.setState(this.state === "closed" ? "connecting" : this.state);
    const socket = this.factory(this.url);
    this.socket = socket;
    socket.addEventListener("open", () => {
      this.setState("connected");
      for (const raw of this.pending.splice(0)) socket.send(raw);
    });
    socket.addEventListener("message", (ev) => {
      const msg = decodeMessage(String(ev.data));
      for (const cb of this.messageCbs) cb(msg);
    });
    socket.addEventListener("close", () => {
      if (this.closed) return;
      this.setState("reconnecting");
      setTimeout(() => {
        if (!this.closed) this.connect();
      }, RECONNECT_DELAY_MS);
    });
    socket.addEventListener("error", () => {
      // close always follows; nothing to do here
    });
  }

  send(msg: WireMessage): void {
    const raw = encodeMessage(msg);
    if (this.state === "connected" && this.socket) {
      this.socket.send(raw);
    } else {
      this.pending.push(raw);
    }
  }

  onMessage(cb: (msg: WireMessage) => void): void {
    this.messageCbs.push(cb);
  }

  onState(cb: (state: ConnectionState) => void): void {
    this.stateCbs.push(cb);
    cb(this.state);
  }

  close(): void {
    this.closed = true;
    this.setState("closed");
    this.socket?.close();
  }
}
