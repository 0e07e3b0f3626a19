import { TelemetryFrame } from "./messages.js";

// Correction-direction panel: per-component coefficient bars over the
// segment's channels, explained-variance labels, and the world-frame
// arrows assigned to each input axis.

export interface BarRect {
  x: number;
  y: number;
  w: number;
  h: number;
}

// Signed horizontal bars around a centerline; used by draw() and tested
// directly since canvas pixels are not observable headlessly.
export function barLayout(
  coeffs: number[],
  width: number,
  rowHeight: number,
  top: number,
): BarRect[] {
  const mid = width / 2;
  let peak = 0;
  for (const c of coeffs) {
    peak = Math.max(peak, Math.abs(c));
  }
  const scale = peak > 0 ? (mid - 4) / peak : 0;
  return coeffs.map((c, i) => {
    const w = c * scale;
    return {
      x: w >= 0 ? mid : mid + w,
      y: top + i * rowHeight + 2,
      w: Math.abs(w),
      h: rowHeight - 4,
    };
  });
}

export class PcPanel {
  readonly element: HTMLDivElement;
  channels: string[] = [];

  private readonly canvas: HTMLCanvasElement;
  private readonly label: HTMLDivElement;
  private frame: TelemetryFrame | null = null;
  private readonly width: number;

  constructor(width = 260) {
    this.width = width;
    this.element = document.createElement("div");
    this.element.className = "pcpanel";
    this.label = document.createElement("div");
    this.label.className = "pcpanel-label";
    this.canvas = document.createElement("canvas");
    this.canvas.width = width;
    this.canvas.height = 300;
    this.element.appendChild(this.label);
    this.element.appendChild(this.canvas);
  }

  setChannels(names: string[]): void {
    this.channels = names.slice();
  }

  update(frame: TelemetryFrame): void {
    this.frame = frame;
    if (frame.zero_variance) {
      this.label.textContent = "no demonstrated variance at this sample";
      return;
    }
    const parts = frame.explained
      .slice(0, frame.k_retained)
      .map((e, k) => `pc${k + 1} ${(e * 100).toFixed(0)}%`);
    this.label.textContent = parts.join("  ");
  }

  draw(): void {
    const ctx = this.canvas.getContext("2d");
    if (!ctx) {
      return;
    }
    ctx.clearRect(0, 0, this.width, this.canvas.height);
    const f = this.frame;
    if (!f || f.zero_variance) {
      return;
    }
    const rowH = 16;
    let top = 4;
    ctx.font = "11px sans-serif";
    f.components.forEach((coeffs, k) => {
      ctx.fillStyle = "#333";
      ctx.fillText(
        `pc${k + 1}  |dy| = ${f.scaled_norms[k]?.toFixed(3) ?? "?"}`,
        4,
        top + 10,
      );
      top += rowH;
      const rects = barLayout(coeffs, this.width, rowH, top);
      rects.forEach((r, i) => {
        ctx.fillStyle = coeffs[i] >= 0 ? "#46c" : "#c64";
        ctx.fillRect(r.x, r.y, r.w, r.h);
        ctx.fillStyle = "#555";
        ctx.fillText(this.channels[i] ?? `ch${i}`, 4, r.y + 10);
      });
      top += coeffs.length * rowH;

      const dir = f.basis_directions[k];
      if (dir) {
        const ok = f.basis_valid[k] ?? false;
        ctx.fillStyle = ok ? "#333" : "#aaa";
        const txt = ok
          ? `d${k + 1} = [${dir.map((v) => v.toFixed(2)).join(", ")}]`
          : `d${k + 1} degenerate`;
        ctx.fillText(txt, 4, top + 10);
        top += rowH;
      }
      top += 6;
    });
  }
}
