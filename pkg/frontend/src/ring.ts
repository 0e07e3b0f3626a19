import { TelemetryFrame } from "./messages.js";

// Bounded telemetry buffer. Capacity matches the service ring so a
// reconnect resume can never need more history than we keep.
export class TelemetryRing {
  private frames: TelemetryFrame[];
  private head = 0;
  private count = 0;

  constructor(readonly capacity = 4096) {
    if (capacity < 1) {
      throw new RangeError("capacity must be positive");
    }
    this.frames = new Array(capacity);
  }

  push(frame: TelemetryFrame): void {
    this.frames[(this.head + this.count) % this.capacity] = frame;
    if (this.count === this.capacity) {
      this.head = (this.head + 1) % this.capacity;
    } else {
      this.count += 1;
    }
  }

  get size(): number {
    return this.count;
  }

  get latest(): TelemetryFrame | undefined {
    if (this.count === 0) {
      return undefined;
    }
    return this.frames[(this.head + this.count - 1) % this.capacity];
  }

  lastTick(): number {
    const f = this.latest;
    return f === undefined ? -1 : f.tick;
  }

  since(fromTick: number): TelemetryFrame[] {
    const out: TelemetryFrame[] = [];
    for (let i = 0; i < this.count; i++) {
      const f = this.frames[(this.head + i) % this.capacity];
      if (f.tick >= fromTick) {
        out.push(f);
      }
    }
    return out;
  }

  clear(): void {
    this.head = 0;
    this.count = 0;
  }
}
