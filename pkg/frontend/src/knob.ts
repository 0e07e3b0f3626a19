// Rotary knob for 1-DOF sessions. Clockwise displacement is positive
// (more force); the needle snaps back to center on release.

const SWEEP_DEG = 135; // each direction from 12 o'clock

export interface KnobEvents {
  input?: (u: number) => void;
  release?: () => void;
}

export class RotaryKnob {
  readonly element: HTMLDivElement;
  value = 0;
  wall = 1;
  degenerate = false;

  private readonly canvas: HTMLCanvasElement;
  private readonly size: number;
  private dragging = false;

  constructor(size = 160, private readonly events: KnobEvents = {}) {
    this.size = size;
    this.element = document.createElement("div");
    this.element.className = "knob";
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
  }

  setWall(wall: number): void {
    this.wall = wall;
  }

  setDegenerate(flag: boolean): void {
    this.degenerate = flag;
  }

  // Angle from 12 o'clock, clockwise positive, clamped to the sweep.
  valueAt(x: number, y: number): number {
    const c = this.size / 2;
    const deg = (Math.atan2(x - c, c - y) * 180) / Math.PI;
    const clamped = Math.max(-SWEEP_DEG, Math.min(SWEEP_DEG, deg));
    return clamped / SWEEP_DEG;
  }

  pressAt(x: number, y: number): void {
    this.dragging = true;
    this.applyValue(this.valueAt(x, y));
  }

  dragTo(x: number, y: number): void {
    if (this.dragging) {
      this.applyValue(this.valueAt(x, y));
    }
  }

  releasePointer(): void {
    if (!this.dragging) {
      return;
    }
    this.dragging = false;
    this.value = 0;
    this.events.input?.(0);
    this.events.release?.();
  }

  get inOverride(): boolean {
    return Math.abs(this.value) > this.wall;
  }

  private applyValue(u: number): void {
    this.value = u;
    this.events.input?.(u);
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
    const c = this.size / 2;
    const r = c - 6;
    ctx.clearRect(0, 0, this.size, this.size);
    ctx.save();
    ctx.translate(c, c);

    const toCanvas = (deg: number) => ((deg - 90) * Math.PI) / 180;

    // proportional sweep
    ctx.beginPath();
    ctx.arc(0, 0, r, toCanvas(-this.wall * SWEEP_DEG), toCanvas(this.wall * SWEEP_DEG));
    ctx.strokeStyle = this.degenerate ? "#999" : "#2a7";
    ctx.lineWidth = 8;
    ctx.stroke();

    // override sweep beyond the wall
    for (const sign of [-1, 1]) {
      ctx.beginPath();
      ctx.arc(
        0,
        0,
        r,
        toCanvas(sign * this.wall * SWEEP_DEG),
        toCanvas(sign * SWEEP_DEG),
        sign < 0,
      );
      ctx.strokeStyle = this.degenerate ? "#bbb" : "#e80";
      ctx.stroke();
    }

    // needle
    const theta = toCanvas(this.value * SWEEP_DEG);
    ctx.beginPath();
    ctx.moveTo(0, 0);
    ctx.lineTo(Math.cos(theta) * (r - 10), Math.sin(theta) * (r - 10));
    ctx.strokeStyle = this.inOverride ? "#e80" : "#333";
    ctx.lineWidth = 4;
    ctx.stroke();

    if (this.degenerate) {
      ctx.fillStyle = "#999";
      ctx.font = "12px sans-serif";
      ctx.textAlign = "center";
      ctx.fillText("no variance", 0, 4);
    }
    ctx.restore();
  }
}
