// Wire types for the correction service, message schema version 1.
// Shapes follow docs/service_protocol.md; clients must refuse to operate
// on a schema version mismatch.

export const MESSAGE_SCHEMA_VERSION = 1;

export interface SegmentInfo {
  kind: string;
  start: number;
  end: number;
  k_retained: number;
  channels: string[];
  ranges: number[];
  units: string[];
}

export interface SessionInfo {
  id: string;
  bundle: string;
  task: string;
  lifecycle: string;
  tick: number;
  input_mode: string;
  n_axes: number;
  recommended_k: number;
  scenario: string | null;
  dt: number;
  wall_threshold: number;
  segments: SegmentInfo[];
}

export interface TelemetryFrame {
  tick: number;
  t: number;
  lifecycle: string;
  segment_index: number;
  segment_kind: string;
  direction: string;
  s: number;
  progress: number;
  frame_index: number;
  rate_scale: number;
  d: number[];
  u_t: number[];
  f_t: number[];
  x_n: number[];
  delta_y: number[];
  x_pre_sat: number[];
  x: number[];
  saturated: string[];
  basis_directions: number[][];
  basis_valid: boolean[];
  components: number[][];
  scaled_norms: number[];
  explained: number[];
  k_retained: number;
  n_valid: number;
  zero_variance: boolean;
  env_events: string[];
  removal: number;
  local_density: number;
  tool_uv: number[] | null;
}

export interface HelloMessage {
  type: "hello";
  message_schema_version: number;
  session: SessionInfo;
}

export interface TelemetryMessage {
  type: "telemetry";
  frame: TelemetryFrame;
}

export interface HeatmapMessage {
  type: "heatmap";
  tick: number;
  shape: [number, number];
  density: number[];
  obstacle: boolean[];
}

export interface StateMessage {
  type: "state";
  session: SessionInfo;
}

export interface PongMessage {
  type: "pong";
}

export interface ErrorMessage {
  type: "error";
  error: string;
}

export type ServerMessage =
  | HelloMessage
  | TelemetryMessage
  | HeatmapMessage
  | StateMessage
  | PongMessage
  | ErrorMessage;

const SERVER_TYPES = new Set([
  "hello",
  "telemetry",
  "heatmap",
  "state",
  "pong",
  "error",
]);

export class ProtocolError extends Error {}

export function parseServerMessage(raw: string): ServerMessage {
  let data: unknown;
  try {
    data = JSON.parse(raw);
  } catch {
    throw new ProtocolError("not JSON");
  }
  if (typeof data !== "object" || data === null) {
    throw new ProtocolError("not an object");
  }
  const msg = data as Record<string, unknown>;
  const type = msg["type"];
  if (typeof type !== "string" || !SERVER_TYPES.has(type)) {
    throw new ProtocolError(`unknown message type ${JSON.stringify(type)}`);
  }
  if (type === "hello" && typeof msg["message_schema_version"] !== "number") {
    throw new ProtocolError("hello without schema version");
  }
  if (type === "telemetry") {
    const frame = msg["frame"] as Record<string, unknown> | undefined;
    if (!frame || typeof frame["tick"] !== "number") {
      throw new ProtocolError("telemetry without frame.tick");
    }
  }
  if (type === "heatmap") {
    const shape = msg["shape"];
    const density = msg["density"];
    const obstacle = msg["obstacle"];
    if (!Array.isArray(shape) || shape.length !== 2) {
      throw new ProtocolError("heatmap without 2-D shape");
    }
    const cells = Number(shape[0]) * Number(shape[1]);
    if (!Array.isArray(density) || density.length !== cells) {
      throw new ProtocolError("heatmap density does not match shape");
    }
    if (!Array.isArray(obstacle) || obstacle.length !== cells) {
      throw new ProtocolError("heatmap obstacle does not match shape");
    }
  }
  return msg as unknown as ServerMessage;
}

export function inputMessage(d: number[], reverse: boolean, seq: number): string {
  return JSON.stringify({ type: "input", d, reverse, seq });
}

export function resumeMessage(fromTick: number): string {
  return JSON.stringify({ type: "resume", from_tick: fromTick });
}

export function pingMessage(): string {
  return JSON.stringify({ type: "ping" });
}
