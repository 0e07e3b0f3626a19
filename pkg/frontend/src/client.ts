import {
  HeatmapMessage,
  MESSAGE_SCHEMA_VERSION,
  SessionInfo,
  TelemetryFrame,
  inputMessage,
  parseServerMessage,
  pingMessage,
  resumeMessage,
} from "./messages.js";
import { TelemetryRing } from "./ring.js";

// Minimal structural view of a WebSocket so tests and node clients can
// substitute their own implementation.
export interface SocketLike {
  send(data: string): void;
  close(): void;
  onopen: (() => void) | null;
  onmessage: ((ev: { data: unknown }) => void) | null;
  onclose: (() => void) | null;
  onerror: (() => void) | null;
}

export type SocketFactory = (url: string) => SocketLike;

export type ClientStatus = "connecting" | "live" | "reconnecting" | "stale";

export interface ClientEvents {
  frame?: (frame: TelemetryFrame) => void;
  heatmap?: (msg: HeatmapMessage) => void;
  state?: (session: SessionInfo) => void;
  status?: (status: ClientStatus) => void;
  latency?: (ms: number) => void;
  error?: (message: string) => void;
  pong?: () => void;
}

export interface ClientOptions {
  inputPeriodMs?: number;
  maxReconnects?: number;
  reconnectBaseMs?: number;
  now?: () => number;
}

interface SentInput {
  d: number[];
  sentAt: number;
}

const INPUT_PERIOD_MS = 30; // > 30 Hz while the widget is displaced
const MAX_PENDING_SENDS = 64;

function sameVector(a: number[], b: number[]): boolean {
  if (a.length !== b.length) {
    return false;
  }
  for (let i = 0; i < a.length; i++) {
    if (a[i] !== b[i]) {
      return false;
    }
  }
  return true;
}

export class SessionClient {
  readonly ring = new TelemetryRing();
  hello: SessionInfo | null = null;
  status: ClientStatus = "connecting";

  private socket: SocketLike | null = null;
  private seq = 0;
  private d: number[];
  private reverse = false;
  private pump: ReturnType<typeof setInterval> | null = null;
  private reconnectTimer: ReturnType<typeof setTimeout> | null = null;
  private attempts = 0;
  private closed = false;
  private pending: SentInput[] = [];
  private readonly period: number;
  private readonly maxReconnects: number;
  private readonly reconnectBaseMs: number;
  private readonly now: () => number;

  constructor(
    private readonly url: string,
    private readonly makeSocket: SocketFactory,
    private readonly events: ClientEvents = {},
    opts: ClientOptions = {},
  ) {
    this.d = [];
    this.period = opts.inputPeriodMs ?? INPUT_PERIOD_MS;
    this.maxReconnects = opts.maxReconnects ?? 8;
    this.reconnectBaseMs = opts.reconnectBaseMs ?? 500;
    this.now = opts.now ?? (() => performance.now());
  }

  connect(): void {
    if (this.closed) {
      return;
    }
    const sock = this.makeSocket(this.url);
    this.socket = sock;
    sock.onmessage = (ev) => this.handleRaw(String(ev.data));
    sock.onclose = () => this.handleClose(sock);
    sock.onerror = () => undefined; // close always follows
    sock.onopen = () => undefined; // the server speaks first (hello)
  }

  close(): void {
    this.closed = true;
    this.stopPump();
    if (this.reconnectTimer !== null) {
      clearTimeout(this.reconnectTimer);
      this.reconnectTimer = null;
    }
    this.socket?.close();
    this.socket = null;
  }

  // Latest-wins input. The first displaced call sends immediately (latency),
  // then a timer refreshes the latch every `period` ms; returning to rest
  // emits exactly one zero message and stops the timer.
  setInput(d: number[], reverse: boolean): void {
    const wasActive = this.isActive();
    this.d = d.slice();
    this.reverse = reverse;
    const active = this.isActive();
    if (active && !wasActive) {
      this.sendInput();
      this.startPump();
    } else if (!active && wasActive) {
      this.stopPump();
      this.sendInput();
    }
  }

  release(): void {
    this.setInput(this.d.map(() => 0), false);
  }

  ping(): void {
    this.sendRaw(pingMessage());
  }

  private isActive(): boolean {
    return this.reverse || this.d.some((v) => v !== 0);
  }

  private startPump(): void {
    if (this.pump === null) {
      this.pump = setInterval(() => this.sendInput(), this.period);
    }
  }

  private stopPump(): void {
    if (this.pump !== null) {
      clearInterval(this.pump);
      this.pump = null;
    }
  }

  private sendInput(): void {
    this.seq += 1;
    this.sendRaw(inputMessage(this.d, this.reverse, this.seq));
    if (this.d.some((v) => v !== 0)) {
      this.pending.push({ d: this.d.slice(), sentAt: this.now() });
      if (this.pending.length > MAX_PENDING_SENDS) {
        this.pending.shift();
      }
    }
  }

  private sendRaw(data: string): void {
    try {
      this.socket?.send(data);
    } catch {
      // socket already closing; reconnect will refresh the latch
    }
  }

  private handleRaw(raw: string): void {
    let msg;
    try {
      msg = parseServerMessage(raw);
    } catch (err) {
      this.events.error?.(String(err));
      return;
    }
    switch (msg.type) {
      case "hello":
        if (msg.message_schema_version !== MESSAGE_SCHEMA_VERSION) {
          this.events.error?.(
            `schema version ${msg.message_schema_version} unsupported`,
          );
          this.setStatus("stale");
          this.close();
          return;
        }
        this.hello = msg.session;
        this.attempts = 0;
        if (this.ring.lastTick() >= 0) {
          this.sendRaw(resumeMessage(this.ring.lastTick() + 1));
        }
        if (this.isActive()) {
          this.sendInput();
          this.startPump();
        }
        this.setStatus("live");
        break;
      case "telemetry":
        this.handleFrame(msg.frame);
        break;
      case "heatmap":
        this.events.heatmap?.(msg);
        break;
      case "state":
        this.events.state?.(msg.session);
        break;
      case "pong":
        this.events.pong?.();
        break;
      case "error":
        this.events.error?.(msg.error);
        break;
    }
  }

  private handleFrame(frame: TelemetryFrame): void {
    if (frame.tick <= this.ring.lastTick()) {
      return; // duplicate from a resume overlap
    }
    this.ring.push(frame);
    this.measureLatency(frame);
    this.events.frame?.(frame);
  }

  private measureLatency(frame: TelemetryFrame): void {
    for (let i = 0; i < this.pending.length; i++) {
      if (sameVector(this.pending[i].d, frame.d)) {
        this.events.latency?.(this.now() - this.pending[i].sentAt);
        this.pending.splice(0, i + 1);
        return;
      }
    }
  }

  private handleClose(sock: SocketLike): void {
    if (this.socket !== sock) {
      return; // stale handler from a replaced socket
    }
    this.socket = null;
    this.stopPump();
    if (this.closed || this.status === "stale") {
      return;
    }
    if (this.attempts >= this.maxReconnects) {
      this.setStatus("stale");
      return;
    }
    this.attempts += 1;
    this.setStatus("reconnecting");
    const delay = Math.min(
      this.reconnectBaseMs * 2 ** (this.attempts - 1),
      5000,
    );
    this.reconnectTimer = setTimeout(() => {
      this.reconnectTimer = null;
      this.connect();
    }, delay);
  }

  private setStatus(status: ClientStatus): void {
    if (status !== this.status) {
      this.status = status;
      this.events.status?.(status);
    }
  }
}
