// End-to-end round trip against a live service. Opt in with
//   CORRKIT_BASE=http://127.0.0.1:8791 npm run test:live
// while `corrkit serve` is running with at least one bundle and the
// shipped scenario. Covers the operator-loop contract: extreme input
// reaches the full correction magnitude, holding past the wall keeps
// accumulating, latency stays within budget, and a reverse hold walks
// the tool back over its own trail.

import { describe, expect, it } from "vitest";
import WebSocket from "ws";
import { SessionClient, SocketLike } from "../src/client.js";
import { uvIndicesFor, wsUrlFor } from "../src/app.js";
import { SurfaceCanvas } from "../src/heatmap.js";
import {
  MESSAGE_SCHEMA_VERSION,
  SessionInfo,
  TelemetryFrame,
} from "../src/messages.js";

const BASE = process.env.CORRKIT_BASE ?? "";

const nodeSocket = (url: string): SocketLike =>
  new WebSocket(url) as unknown as SocketLike;

async function waitFor<T>(
  poll: () => T | undefined,
  timeoutMs: number,
  label: string,
): Promise<T> {
  const deadline = Date.now() + timeoutMs;
  for (;;) {
    const v = poll();
    if (v !== undefined) {
      return v;
    }
    if (Date.now() > deadline) {
      throw new Error(`timed out waiting for ${label}`);
    }
    await new Promise((r) => setTimeout(r, 25));
  }
}

function norm(v: number[]): number {
  return Math.sqrt(v.reduce((a, x) => a + x * x, 0));
}

describe.runIf(BASE !== "")("live operator round trip", () => {
  it(
    "drives a session through correction, override, and reverse",
    { timeout: 60000 },
    async () => {
      const version = await (await fetch(`${BASE}/api/version`)).json();
      expect(version.message_schema_version).toBe(MESSAGE_SCHEMA_VERSION);

      const bundles = (await (await fetch(`${BASE}/api/bundles`)).json())
        .bundles as { name: string }[];
      const scenarios = (await (await fetch(`${BASE}/api/scenarios`)).json())
        .scenarios as string[];
      expect(bundles.length).toBeGreaterThan(0);
      expect(scenarios.length).toBeGreaterThan(0);

      // a hotter integral gain so the override accumulates to full scale
      // within one contact pass
      const created = await fetch(`${BASE}/api/sessions`, {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({
          bundle: bundles[0].name,
          scenario: scenarios[0],
          input_mode: "1dof",
          override: { gamma: 5.0 },
        }),
      });
      expect(created.status).toBe(201);
      const info = (await created.json()) as SessionInfo;

      const frames: TelemetryFrame[] = [];
      const latencies: number[] = [];
      const surface = new SurfaceCanvas(120);
      const client = new SessionClient(
        wsUrlFor(BASE, info.id),
        nodeSocket,
        {
          frame: (f) => {
            frames.push(f);
            surface.observe(f, uvIndicesFor(info, f.segment_index));
          },
          latency: (ms) => latencies.push(ms),
        },
      );
      client.connect();
      await waitFor(
        () => (client.status === "live" ? true : undefined),
        5000,
        "hello",
      );

      const started = await fetch(`${BASE}/api/sessions/${info.id}/start`, {
        method: "POST",
      });
      expect(started.status).toBe(200);

      // reach the contact segment, then push the knob to its extreme
      await waitFor(
        () =>
          frames.find((f) => f.segment_kind === "in_contact") ? true : undefined,
        20000,
        "contact segment",
      );
      client.setInput([1.0], false);

      // full-scale correction: |delta_y| catches up to the advertised
      // per-direction magnitude once the accumulated u_t passes 1
      await waitFor(
        () => {
          const f = frames[frames.length - 1];
          return f &&
            f.segment_kind === "in_contact" &&
            f.scaled_norms.length > 0 &&
            f.scaled_norms[0] > 0 &&
            norm(f.delta_y) >= 0.97 * f.scaled_norms[0]
            ? true
            : undefined;
        },
        20000,
        "full-scale correction",
      );

      // the override region keeps integrating while held past the wall
      const held = frames.filter(
        (f) =>
          f.segment_kind === "in_contact" &&
          f.d.length > 0 &&
          f.d[0] === 1.0 &&
          f.direction === "forward",
      );
      expect(held.length).toBeGreaterThan(30);
      const u = held.map((f) => f.u_t[0]);
      for (let i = 1; i < u.length; i++) {
        expect(u[i]).toBeGreaterThanOrEqual(u[i - 1]);
      }
      expect(u[u.length - 1] - u[0]).toBeGreaterThan(0.05);
      expect(Math.max(...u)).toBeGreaterThan(info.wall_threshold);

      // hold reverse: progress runs backward and the tool revisits its trail
      const forwardTrail = surface.trail.slice();
      const revStartTick = client.ring.lastTick();
      client.setInput([1.0], true);
      const backFrames = await waitFor(
        () => {
          const back = frames.filter(
            (f) => f.tick > revStartTick && f.direction === "backward",
          );
          return back.length >= 40 ? back : undefined;
        },
        15000,
        "reverse hold",
      );
      client.release();

      const progress = backFrames.map((f) => f.progress);
      expect(progress[progress.length - 1]).toBeLessThan(progress[0]);
      const last = backFrames[backFrames.length - 1];
      if (last.tool_uv !== null) {
        const [bu, bv] = last.tool_uv;
        const revisit = forwardTrail.some(
          (p) => Math.hypot(p[0] - bu, p[1] - bv) < 0.05,
        );
        expect(revisit).toBe(true);
      }

      // latency budget, measured from the client's own send stamps
      expect(latencies.length).toBeGreaterThan(0);
      const sorted = latencies.slice().sort((a, b) => a - b);
      const median = sorted[Math.floor(sorted.length / 2)];
      expect(median).toBeLessThan(150);

      client.close();
      await fetch(`${BASE}/api/sessions/${info.id}/abort`, { method: "POST" });
    },
  );
});
