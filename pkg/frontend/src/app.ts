import { ClientStatus, SessionClient, SocketFactory } from "./client.js";
import { ForceGauge } from "./gauge.js";
import { SurfaceCanvas } from "./heatmap.js";
import { RotaryKnob } from "./knob.js";
import {
  MESSAGE_SCHEMA_VERSION,
  SessionInfo,
  TelemetryFrame,
} from "./messages.js";
import { InputPad } from "./pad.js";
import { PcPanel } from "./pcpanel.js";

export function wsUrlFor(baseUrl: string, sessionId: string): string {
  const u = new URL(baseUrl);
  const scheme = u.protocol === "https:" ? "wss:" : "ws:";
  return `${scheme}//${u.host}/api/sessions/${sessionId}/stream`;
}

// (u, v) positions in the segment's channel order, or null when the
// segment has no surface coordinates (free space).
export function uvIndicesFor(
  info: SessionInfo,
  segmentIndex: number,
): [number, number] | null {
  const seg = info.segments[segmentIndex];
  if (!seg) {
    return null;
  }
  const iu = seg.channels.indexOf("u");
  const iv = seg.channels.indexOf("v");
  return iu >= 0 && iv >= 0 ? [iu, iv] : null;
}

function button(label: string, onClick: () => void): HTMLButtonElement {
  const b = document.createElement("button");
  b.textContent = label;
  b.addEventListener("click", onClick);
  return b;
}

export class OperatorApp {
  readonly banner: HTMLDivElement;
  readonly statusLine: HTMLDivElement;
  readonly statusText: HTMLSpanElement;
  readonly latencyLine: HTMLSpanElement;
  client: SessionClient | null = null;
  info: SessionInfo | null = null;

  private readonly widgets: { draw(): void }[] = [];
  private knob: RotaryKnob | null = null;
  private pad: InputPad | null = null;
  private gauge: ForceGauge | null = null;
  private surface: SurfaceCanvas | null = null;
  private pcpanel: PcPanel | null = null;
  private reverseHeld = false;
  private lastInput: number[] = [];
  private rafRunning = false;
  private readonly sessionPane: HTMLDivElement;
  private readonly setupPane: HTMLDivElement;

  constructor(
    private readonly root: HTMLElement,
    private readonly baseUrl: string,
    private readonly makeSocket: SocketFactory = (url) =>
      new WebSocket(url) as unknown as ReturnType<SocketFactory>,
  ) {
    this.banner = document.createElement("div");
    this.banner.className = "banner";
    this.banner.style.display = "none";
    this.statusLine = document.createElement("div");
    this.statusLine.className = "status";
    this.statusText = document.createElement("span");
    this.latencyLine = document.createElement("span");
    this.statusLine.appendChild(this.statusText);
    this.statusLine.appendChild(this.latencyLine);
    this.setupPane = document.createElement("div");
    this.sessionPane = document.createElement("div");
    this.root.appendChild(this.banner);
    this.root.appendChild(this.setupPane);
    this.root.appendChild(this.sessionPane);
  }

  async init(): Promise<void> {
    const version = await this.getJson("/api/version");
    if (version.message_schema_version !== MESSAGE_SCHEMA_VERSION) {
      this.showBanner(
        `service speaks schema ${version.message_schema_version}, ` +
          `this console needs ${MESSAGE_SCHEMA_VERSION}`,
      );
      return;
    }
    const bundles = (await this.getJson("/api/bundles")).bundles as {
      name: string;
    }[];
    const scenarios = (await this.getJson("/api/scenarios"))
      .scenarios as string[];
    this.buildSetupForm(
      bundles.map((b) => b.name),
      scenarios,
    );
  }

  private buildSetupForm(bundles: string[], scenarios: string[]): void {
    const bundleSel = this.select("bundle", bundles);
    const scenarioSel = this.select("scenario", ["none", ...scenarios]);
    const modeSel = this.select("mode", ["1dof", "3dof"]);
    this.setupPane.appendChild(bundleSel);
    this.setupPane.appendChild(scenarioSel);
    this.setupPane.appendChild(modeSel);
    this.setupPane.appendChild(
      button("create session", () => {
        void this.createSession(
          bundleSel.value,
          scenarioSel.value === "none" ? null : scenarioSel.value,
          modeSel.value,
        );
      }),
    );
  }

  private select(name: string, options: string[]): HTMLSelectElement {
    const sel = document.createElement("select");
    sel.name = name;
    for (const o of options) {
      const opt = document.createElement("option");
      opt.value = o;
      opt.textContent = o;
      sel.appendChild(opt);
    }
    return sel;
  }

  async createSession(
    bundle: string,
    scenario: string | null,
    inputMode: string,
  ): Promise<void> {
    const body: Record<string, unknown> = { bundle, input_mode: inputMode };
    if (scenario) {
      body.scenario = scenario;
    }
    const res = await fetch(`${this.baseUrl}/api/sessions`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    if (!res.ok) {
      this.showBanner(`session create failed: ${res.status}`);
      return;
    }
    this.info = (await res.json()) as SessionInfo;
    this.buildSessionView(this.info);
    this.openStream(this.info.id);
  }

  private buildSessionView(info: SessionInfo): void {
    this.sessionPane.textContent = "";
    this.widgets.length = 0;
    this.lastInput = new Array(info.n_axes).fill(0);

    const controls = document.createElement("div");
    controls.className = "controls";
    controls.appendChild(button("start", () => void this.post("start")));
    controls.appendChild(button("pause", () => void this.post("pause")));
    controls.appendChild(button("resume", () => void this.post("resume")));
    controls.appendChild(button("abort", () => void this.post("abort")));

    const rev = document.createElement("button");
    rev.textContent = "hold to reverse";
    rev.className = "reverse";
    rev.addEventListener("pointerdown", () => this.setReverse(true));
    rev.addEventListener("pointerup", () => this.setReverse(false));
    rev.addEventListener("pointercancel", () => this.setReverse(false));
    rev.addEventListener("pointerleave", () => this.setReverse(false));
    controls.appendChild(rev);
    this.sessionPane.appendChild(controls);

    const row = document.createElement("div");
    row.className = "panels";
    if (info.input_mode === "3dof") {
      this.pad = new InputPad(220, {
        input: (d) => this.sendInput(d),
        release: () => this.sendInput([0, 0, 0]),
      });
      this.pad.setWall(info.wall_threshold);
      row.appendChild(this.pad.element);
      this.widgets.push(this.pad);
    } else {
      this.knob = new RotaryKnob(160, {
        input: (u) => this.sendInput([u]),
        release: () => this.sendInput([0]),
      });
      this.knob.setWall(info.wall_threshold);
      row.appendChild(this.knob.element);
      this.widgets.push(this.knob);
    }

    this.gauge = new ForceGauge();
    row.appendChild(this.gauge.element);
    this.widgets.push(this.gauge);

    this.surface = new SurfaceCanvas();
    row.appendChild(this.surface.element);
    this.widgets.push(this.surface);

    this.pcpanel = new PcPanel();
    row.appendChild(this.pcpanel.element);
    this.widgets.push(this.pcpanel);

    this.sessionPane.appendChild(row);
    this.statusText.textContent = `session ${info.id} ${info.lifecycle}`;
    this.sessionPane.appendChild(this.statusLine);
  }

  private openStream(sessionId: string): void {
    this.client?.close();
    this.client = new SessionClient(
      wsUrlFor(this.baseUrl, sessionId),
      this.makeSocket,
      {
        frame: (f) => this.onFrame(f),
        heatmap: (h) => this.surface?.setHeatmap(h),
        state: (s) => this.onState(s),
        status: (s) => this.onStatus(s),
        latency: (ms) => {
          this.latencyLine.textContent = `  input latency ${ms.toFixed(0)} ms`;
        },
        error: (e) => this.showBanner(e),
      },
    );
    this.client.connect();
    this.startRenderLoop();
  }

  private onFrame(f: TelemetryFrame): void {
    const info = this.info;
    if (!info) {
      return;
    }
    this.statusText.textContent =
      `tick ${f.tick} ${f.segment_kind} ${f.direction} ` +
      `progress ${(f.progress * 100).toFixed(0)}% ` +
      `density ${f.local_density.toFixed(2)}`;
    this.gauge?.update(f.f_t, f.d, info.wall_threshold);
    this.pcpanel?.setChannels(info.segments[f.segment_index]?.channels ?? []);
    this.pcpanel?.update(f);
    this.surface?.observe(f, uvIndicesFor(info, f.segment_index));
    this.knob?.setDegenerate(f.zero_variance || f.n_valid === 0);
    if (this.pad) {
      this.pad.setAxisValid(f.basis_valid);
      this.pad.setArrows(f.basis_directions);
    }
  }

  private onState(s: SessionInfo): void {
    this.info = s;
    this.statusText.textContent = `session ${s.id} ${s.lifecycle}`;
    if (s.lifecycle === "completed" || s.lifecycle === "faulted") {
      this.showBanner(`session ${s.lifecycle}`);
    }
  }

  private onStatus(s: ClientStatus): void {
    if (s === "live") {
      this.hideBanner();
    } else if (s === "reconnecting") {
      this.showBanner("connection lost, reconnecting");
    } else if (s === "stale") {
      this.showBanner("session unreachable, controls are stale");
    }
  }

  private sendInput(d: number[]): void {
    this.lastInput = d.slice();
    this.client?.setInput(d, this.reverseHeld);
  }

  private setReverse(held: boolean): void {
    if (this.reverseHeld === held) {
      return;
    }
    this.reverseHeld = held;
    this.client?.setInput(this.lastInput, held);
  }

  private async post(action: string): Promise<void> {
    if (!this.info) {
      return;
    }
    const res = await fetch(
      `${this.baseUrl}/api/sessions/${this.info.id}/${action}`,
      { method: "POST" },
    );
    if (!res.ok) {
      this.showBanner(`${action}: HTTP ${res.status}`);
    } else {
      this.hideBanner();
    }
  }

  private async getJson(path: string): Promise<Record<string, unknown>> {
    const res = await fetch(`${this.baseUrl}${path}`);
    if (!res.ok) {
      throw new Error(`${path}: HTTP ${res.status}`);
    }
    return (await res.json()) as Record<string, unknown>;
  }

  private startRenderLoop(): void {
    if (this.rafRunning || typeof requestAnimationFrame === "undefined") {
      return;
    }
    this.rafRunning = true;
    const step = () => {
      for (const w of this.widgets) {
        w.draw();
      }
      requestAnimationFrame(step);
    };
    requestAnimationFrame(step);
  }

  showBanner(text: string): void {
    this.banner.textContent = text;
    this.banner.style.display = "block";
  }

  hideBanner(): void {
    this.banner.style.display = "none";
  }
}
