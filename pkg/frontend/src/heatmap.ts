import { HeatmapMessage, TelemetryFrame } from "./messages.js";

// Surface canvas: coating density over (u, v) with obstacles, the nominal
// path, and the commanded tool trail. Everything drawn comes from received
// telemetry; the canvas never extrapolates between frames.

const TRAIL_LIMIT = 4000;

export function densityColor(v: number): string {
  // full coating = deep blue, clean surface = near white
  const t = Math.max(0, Math.min(1, v));
  const r = Math.round(245 - 185 * t);
  const g = Math.round(247 - 157 * t);
  const b = Math.round(250 - 80 * t);
  return `rgb(${r},${g},${b})`;
}

export function cellAt(
  msg: HeatmapMessage,
  row: number,
  col: number,
): { density: number; obstacle: boolean } {
  const [, nv] = msg.shape;
  const i = row * nv + col; // row-major, rows along u
  return { density: msg.density[i], obstacle: msg.obstacle[i] };
}

export class SurfaceCanvas {
  readonly element: HTMLCanvasElement;
  trail: [number, number][] = [];
  nominal: [number, number][] = [];

  private grid: HeatmapMessage | null = null;
  private latest: TelemetryFrame | null = null;
  private readonly px: number;

  constructor(px = 360) {
    this.px = px;
    this.element = document.createElement("canvas");
    this.element.width = px;
    this.element.height = px;
    this.element.className = "surface";
  }

  setHeatmap(msg: HeatmapMessage): void {
    this.grid = msg;
  }

  // uvIndices locates the (u, v) channels in the frame's segment schema;
  // null outside contact segments.
  observe(frame: TelemetryFrame, uvIndices: [number, number] | null): void {
    this.latest = frame;
    if (frame.tool_uv !== null) {
      this.pushPoint(this.trail, [frame.tool_uv[0], frame.tool_uv[1]]);
    }
    if (uvIndices !== null) {
      const [iu, iv] = uvIndices;
      this.pushPoint(this.nominal, [frame.x_n[iu], frame.x_n[iv]]);
    }
  }

  clearPaths(): void {
    this.trail = [];
    this.nominal = [];
  }

  private pushPoint(list: [number, number][], p: [number, number]): void {
    const last = list[list.length - 1];
    if (last && last[0] === p[0] && last[1] === p[1]) {
      return;
    }
    list.push(p);
    if (list.length > TRAIL_LIMIT) {
      list.shift();
    }
  }

  private toPx(p: [number, number]): [number, number] {
    return [p[0] * this.px, p[1] * this.px];
  }

  draw(): void {
    const ctx = this.element.getContext("2d");
    if (!ctx) {
      return;
    }
    ctx.clearRect(0, 0, this.px, this.px);

    if (this.grid) {
      const [nu, nv] = this.grid.shape;
      const cw = this.px / nu;
      const ch = this.px / nv;
      for (let r = 0; r < nu; r++) {
        for (let c = 0; c < nv; c++) {
          const cell = cellAt(this.grid, r, c);
          ctx.fillStyle = cell.obstacle ? "#c33" : densityColor(cell.density);
          ctx.fillRect(r * cw, c * ch, cw + 0.5, ch + 0.5);
        }
      }
    }

    if (this.nominal.length > 1) {
      ctx.strokeStyle = "rgba(60,60,60,0.55)";
      ctx.lineWidth = 1.5;
      ctx.setLineDash([5, 4]);
      this.strokePath(ctx, this.nominal);
      ctx.setLineDash([]);
    }

    if (this.trail.length > 1) {
      ctx.strokeStyle = "rgba(20,90,200,0.8)";
      ctx.lineWidth = 2.5;
      this.strokePath(ctx, this.trail);
    }

    const f = this.latest;
    if (f && f.tool_uv !== null) {
      const [x, y] = this.toPx([f.tool_uv[0], f.tool_uv[1]]);
      ctx.beginPath();
      ctx.arc(x, y, 7, 0, 2 * Math.PI);
      ctx.fillStyle = f.direction === "backward" ? "#e0a000" : "#1450c8";
      ctx.fill();
      ctx.strokeStyle = "#fff";
      ctx.stroke();
      if (f.direction === "backward") {
        ctx.fillStyle = "#e0a000";
        ctx.font = "bold 13px sans-serif";
        ctx.fillText("REVERSE", 8, 16);
      }
    }
  }

  private strokePath(
    ctx: CanvasRenderingContext2D,
    pts: [number, number][],
  ): void {
    ctx.beginPath();
    const [x0, y0] = this.toPx(pts[0]);
    ctx.moveTo(x0, y0);
    for (let i = 1; i < pts.length; i++) {
      const [x, y] = this.toPx(pts[i]);
      ctx.lineTo(x, y);
    }
    ctx.stroke();
  }
}
