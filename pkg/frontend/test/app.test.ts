import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";
import { OperatorApp, uvIndicesFor, wsUrlFor } from "../src/app.js";
import { SocketLike } from "../src/client.js";
import { MESSAGE_SCHEMA_VERSION, SessionInfo } from "../src/messages.js";

describe("wsUrlFor", () => {
  it("derives the stream endpoint from the http base", () => {
    expect(wsUrlFor("http://localhost:8791", "s1")).toBe(
      "ws://localhost:8791/api/sessions/s1/stream",
    );
    expect(wsUrlFor("https://robot.example", "s9")).toBe(
      "wss://robot.example/api/sessions/s9/stream",
    );
  });
});

function info(): SessionInfo {
  return {
    id: "s1",
    bundle: "demo",
    task: "wipe",
    lifecycle: "created",
    tick: 0,
    input_mode: "1dof",
    n_axes: 1,
    recommended_k: 1,
    scenario: "shipped",
    dt: 0.01,
    wall_threshold: 0.6,
    segments: [
      {
        kind: "free_space",
        start: 0,
        end: 66,
        k_retained: 1,
        channels: ["x", "y", "z"],
        ranges: [1, 1, 1],
        units: ["m", "m", "m"],
      },
      {
        kind: "in_contact",
        start: 66,
        end: 203,
        k_retained: 1,
        channels: ["u", "v", "f_n"],
        ranges: [1, 1, 20],
        units: ["", "", "N"],
      },
    ],
  };
}

describe("uvIndicesFor", () => {
  it("finds surface coordinates in contact segments only", () => {
    expect(uvIndicesFor(info(), 1)).toEqual([0, 1]);
    expect(uvIndicesFor(info(), 0)).toBeNull();
    expect(uvIndicesFor(info(), 7)).toBeNull();
  });
});

function fullFrame(overrides: Record<string, unknown> = {}) {
  return {
    tick: 70,
    t: 0.7,
    lifecycle: "running",
    segment_index: 1,
    segment_kind: "in_contact",
    direction: "forward",
    s: 0.9,
    progress: 0.1,
    frame_index: 70,
    rate_scale: 1,
    d: [0.5],
    u_t: [0.5],
    f_t: [1.0],
    x_n: [0.2, 0.5, 8],
    delta_y: [0, 0, 2.7],
    x_pre_sat: [0.2, 0.5, 10.7],
    x: [0.2, 0.5, 10.7],
    saturated: [],
    basis_directions: [[0, 0, -1]],
    basis_valid: [true],
    components: [[0, 0, 1]],
    scaled_norms: [5.4],
    explained: [0.87],
    k_retained: 1,
    n_valid: 1,
    zero_variance: false,
    env_events: [],
    removal: 0.001,
    local_density: 0.4,
    tool_uv: [0.21, 0.5],
    ...overrides,
  };
}

class FakeSocket implements SocketLike {
  sent: string[] = [];
  onopen: (() => void) | null = null;
  onmessage: ((ev: { data: unknown }) => void) | null = null;
  onclose: (() => void) | null = null;
  onerror: (() => void) | null = null;
  send(data: string): void {
    this.sent.push(data);
  }
  close(): void {}
  receive(obj: unknown): void {
    this.onmessage?.({ data: JSON.stringify(obj) });
  }
}

describe("OperatorApp", () => {
  let sockets: FakeSocket[];
  let fetchMock: ReturnType<typeof vi.fn>;

  function jsonResponse(body: unknown, status = 200) {
    return {
      ok: status < 400,
      status,
      json: () => Promise.resolve(body),
    };
  }

  beforeEach(() => {
    sockets = [];
    fetchMock = vi.fn((url: string, init?: { method?: string }) => {
      const path = new URL(url).pathname;
      if (path === "/api/version") {
        return Promise.resolve(
          jsonResponse({
            service: "correction-service",
            message_schema_version: MESSAGE_SCHEMA_VERSION,
          }),
        );
      }
      if (path === "/api/bundles") {
        return Promise.resolve(
          jsonResponse({ bundles: [{ name: "demo", task: "wipe" }] }),
        );
      }
      if (path === "/api/scenarios") {
        return Promise.resolve(jsonResponse({ scenarios: ["shipped"] }));
      }
      if (path === "/api/sessions" && init?.method === "POST") {
        return Promise.resolve(jsonResponse(info(), 201));
      }
      if (path.endsWith("/start") && init?.method === "POST") {
        return Promise.resolve(jsonResponse({ lifecycle: "running" }));
      }
      return Promise.resolve(jsonResponse({ detail: "nope" }, 404));
    });
    vi.stubGlobal("fetch", fetchMock);
  });

  afterEach(() => {
    vi.unstubAllGlobals();
  });

  function makeApp(root: HTMLElement): OperatorApp {
    return new OperatorApp(root, "http://test:1", () => {
      const s = new FakeSocket();
      sockets.push(s);
      return s;
    });
  }

  it("builds the setup form from the published lists", async () => {
    const root = document.createElement("div");
    const app = makeApp(root);
    await app.init();
    const selects = root.querySelectorAll("select");
    expect(selects).toHaveLength(3);
    expect(selects[0].options[0].value).toBe("demo");
    expect(Array.from(selects[1].options).map((o) => o.value)).toEqual([
      "none",
      "shipped",
    ]);
    expect(Array.from(selects[2].options).map((o) => o.value)).toEqual([
      "1dof",
      "3dof",
    ]);
  });

  it("refuses to run against a different schema version", async () => {
    fetchMock.mockImplementation((url: string) => {
      if (new URL(url).pathname === "/api/version") {
        return Promise.resolve(
          jsonResponse({ service: "x", message_schema_version: 99 }),
        );
      }
      throw new Error("should not be called");
    });
    const root = document.createElement("div");
    const app = makeApp(root);
    await app.init();
    expect(app.banner.style.display).toBe("block");
    expect(app.banner.textContent).toContain("schema 99");
    expect(root.querySelectorAll("select")).toHaveLength(0);
  });

  it("creates a session, opens the stream, and feeds the widgets", async () => {
    const root = document.createElement("div");
    const app = makeApp(root);
    await app.init();
    await app.createSession("demo", "shipped", "1dof");

    expect(sockets).toHaveLength(1);
    sockets[0].receive({
      type: "hello",
      message_schema_version: MESSAGE_SCHEMA_VERSION,
      session: info(),
    });
    expect(app.client!.status).toBe("live");

    sockets[0].receive({ type: "telemetry", frame: fullFrame() });

    expect(app.statusText.textContent).toContain("tick 70");
    expect(app.statusText.textContent).toContain("in_contact");
    // a banner-free live stream
    expect(app.banner.style.display).toBe("none");

    // stale banner after the stream reports completion
    sockets[0].receive({
      type: "state",
      session: { ...info(), lifecycle: "completed" },
    });
    expect(app.banner.textContent).toContain("completed");
    app.client!.close();
  });

  it("shows the latency readout from client samples", async () => {
    const root = document.createElement("div");
    const app = makeApp(root);
    await app.init();
    await app.createSession("demo", "shipped", "1dof");
    sockets[0].receive({
      type: "hello",
      message_schema_version: MESSAGE_SCHEMA_VERSION,
      session: info(),
    });
    app.client!.setInput([0.5], false);
    sockets[0].receive({
      type: "telemetry",
      frame: fullFrame({ tick: 0, d: [0.5] }),
    });
    expect(app.latencyLine.textContent).toMatch(/input latency \d+ ms/);
    app.client!.close();
  });
});
