// Force-feedback gauge: a visual stand-in for the device resistance.
// The region is decided by displacement against the wall threshold; the
// bars show the resistance magnitude the device would render.

export type InputRegion = "idle" | "proportional" | "override";

export function inputRegion(d: number[], wall: number): InputRegion {
  let peak = 0;
  for (const v of d) {
    peak = Math.max(peak, Math.abs(v));
  }
  if (peak === 0) {
    return "idle";
  }
  return peak <= wall ? "proportional" : "override";
}

const REGION_COLOR: Record<InputRegion, string> = {
  idle: "#999",
  proportional: "#2a7",
  override: "#e80",
};

export class ForceGauge {
  readonly element: HTMLDivElement;
  region: InputRegion = "idle";
  forces: number[] = [];

  private readonly canvas: HTMLCanvasElement;
  private readonly badge: HTMLSpanElement;
  private readonly width: number;
  private readonly height: number;
  private scale = 1;

  constructor(width = 220, height = 72) {
    this.width = width;
    this.height = height;
    this.element = document.createElement("div");
    this.element.className = "gauge";
    this.canvas = document.createElement("canvas");
    this.canvas.width = width;
    this.canvas.height = height;
    this.badge = document.createElement("span");
    this.badge.className = "gauge-badge";
    this.element.appendChild(this.canvas);
    this.element.appendChild(this.badge);
  }

  update(f_t: number[], d: number[], wall: number): void {
    this.forces = f_t.slice();
    this.region = inputRegion(d, wall);
    for (const f of f_t) {
      this.scale = Math.max(this.scale, Math.abs(f));
    }
    this.badge.textContent = this.region === "override" ? "OVERRIDE" : "";
    this.badge.style.color = REGION_COLOR.override;
  }

  draw(): void {
    const ctx = this.canvas.getContext("2d");
    if (!ctx) {
      return;
    }
    ctx.clearRect(0, 0, this.width, this.height);
    const n = Math.max(this.forces.length, 1);
    const barH = this.height / n;
    const mid = this.width / 2;
    ctx.strokeStyle = "#ccc";
    ctx.beginPath();
    ctx.moveTo(mid, 0);
    ctx.lineTo(mid, this.height);
    ctx.stroke();
    ctx.fillStyle = REGION_COLOR[this.region];
    this.forces.forEach((f, i) => {
      const w = (f / this.scale) * (mid - 4);
      ctx.fillRect(mid, i * barH + 4, w, barH - 8);
    });
  }
}
