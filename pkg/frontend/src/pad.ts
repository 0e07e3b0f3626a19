// 2-D input pad plus a scroll-wheel third axis for 3-DOF sessions.
// Displacement is normalized to [-1, 1] per axis and snaps back to zero
// on release. World-frame arrows show what each input axis does; axes
// without a valid direction are grayed out.

export interface PadEvents {
  input?: (d: number[]) => void;
  release?: () => void;
}

const WHEEL_STEP = 0.05;

export function clampAxis(v: number): number {
  if (v === 0) {
    return 0; // collapse -0 so rest is exactly zero
  }
  return Math.max(-1, Math.min(1, v));
}

export class InputPad {
  readonly element: HTMLDivElement;
  value: number[] = [0, 0, 0];
  wall = 1;
  axisValid: boolean[] = [true, true, true];

  private readonly canvas: HTMLCanvasElement;
  private readonly size: number;
  private dragging = false;
  private arrows: number[][] = [];

  constructor(size = 220, private readonly events: PadEvents = {}) {
    this.size = size;
    this.element = document.createElement("div");
    this.element.className = "pad";
    this.element.style.touchAction = "none";
    this.canvas = document.createElement("canvas");
    this.canvas.width = size;
    this.canvas.height = size;
    this.element.appendChild(this.canvas);

    this.element.addEventListener("pointerdown", (ev) => {
      const p = this.toLocal(ev.clientX, ev.clientY);
      this.pressAt(p.x, p.y);
    });
    this.element.addEventListener("pointermove", (ev) => {
      const p = this.toLocal(ev.clientX, ev.clientY);
      this.dragTo(p.x, p.y);
    });
    this.element.addEventListener("pointerup", () => this.releasePointer());
    this.element.addEventListener("pointercancel", () => this.releasePointer());
    this.element.addEventListener("wheel", (ev) => {
      ev.preventDefault();
      this.wheel(ev.deltaY);
    });
  }

  setWall(wall: number): void {
    this.wall = wall;
  }

  setAxisValid(valid: boolean[]): void {
    this.axisValid = valid.slice();
  }

  setArrows(directions: number[][]): void {
    this.arrows = directions.map((d) => d.slice());
  }

  // Screen y grows downward; pushing the pad up is a positive second axis.
  valueAt(x: number, y: number): [number, number] {
    const ux = clampAxis(2 * (x / this.size - 0.5));
    const uy = clampAxis(-2 * (y / this.size - 0.5));
    return [ux, uy];
  }

  pressAt(x: number, y: number): void {
    this.dragging = true;
    const [ux, uy] = this.valueAt(x, y);
    this.apply([ux, uy, this.value[2]]);
  }

  dragTo(x: number, y: number): void {
    if (this.dragging) {
      const [ux, uy] = this.valueAt(x, y);
      this.apply([ux, uy, this.value[2]]);
    }
  }

  wheel(deltaY: number): void {
    const v = clampAxis(this.value[2] - Math.sign(deltaY) * WHEEL_STEP);
    this.apply([this.value[0], this.value[1], v]);
  }

  releasePointer(): void {
    if (!this.dragging && this.value.every((v) => v === 0)) {
      return;
    }
    this.dragging = false;
    this.value = [0, 0, 0];
    this.events.input?.([0, 0, 0]);
    this.events.release?.();
  }

  get inOverride(): boolean {
    return this.value.some((v) => Math.abs(v) > this.wall);
  }

  private apply(d: number[]): void {
    this.value = d;
    this.events.input?.(d.slice());
  }

  private toLocal(clientX: number, clientY: number): { x: number; y: number } {
    const rect = this.element.getBoundingClientRect();
    return { x: clientX - rect.left, y: clientY - rect.top };
  }

  draw(): void {
    const ctx = this.canvas.getContext("2d");
    if (!ctx) {
      return;
    }
    const s = this.size;
    const c = s / 2;
    ctx.clearRect(0, 0, s, s);

    // proportional box, then the override margin beyond it
    ctx.strokeStyle = "#e80";
    ctx.lineWidth = 2;
    ctx.strokeRect(1, 1, s - 2, s - 2);
    const w = (this.wall * s) / 2;
    ctx.strokeStyle = "#2a7";
    ctx.strokeRect(c - w, c - w, 2 * w, 2 * w);

    // input-mapping arrows
    this.arrows.forEach((dir, k) => {
      const valid = this.axisValid[k] ?? false;
      ctx.strokeStyle = valid ? "#46c" : "#bbb";
      ctx.fillStyle = ctx.strokeStyle;
      ctx.lineWidth = 2;
      const ax = c + dir[0] * c * 0.7;
      const ay = c - dir[1] * c * 0.7;
      ctx.beginPath();
      ctx.moveTo(c, c);
      ctx.lineTo(ax, ay);
      ctx.stroke();
      ctx.font = "11px sans-serif";
      ctx.fillText(`d${k + 1}`, ax + 3, ay - 3);
    });

    // third axis bar on the right edge, drawn from the vertical center
    ctx.fillStyle = (this.axisValid[2] ?? false) ? "#46c" : "#bbb";
    ctx.fillRect(s - 10, c, 8, -this.value[2] * (c - 4));

    // nub
    ctx.beginPath();
    ctx.arc(c + this.value[0] * c, c - this.value[1] * c, 9, 0, 2 * Math.PI);
    ctx.fillStyle = this.inOverride ? "#e80" : "#333";
    ctx.fill();
  }
}
