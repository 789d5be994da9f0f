/** Gesture capture: pointer events on a canvas become raw traces in the
 * service's wire format. Capture runs from pointer-down to pointer-up at
 * native event rate; the canvas geometry stands in for the device. */

import { RawTrace, TracePoint } from "./schema.js";

export const MIN_SWIPE_FRACTION = 0.2; // matches the service quality gate
const DEFAULT_POINTER_SIZE = 0.35; // mice and many pens report no size

export interface CompletedGesture {
  points: TracePoint[];
  dxFraction: number; // signed horizontal travel as a fraction of width
}

type GestureHandler = (gesture: CompletedGesture) => void;
type ProgressHandler = (dxFraction: number, active: boolean) => void;

interface PointerLike {
  pointerId?: number;
  clientX: number;
  clientY: number;
  width?: number;
  pressure?: number;
  timeStamp: number;
}

export class GestureCapture {
  private points: TracePoint[] = [];
  private startStamp = 0;
  private activePointer: number | null = null;
  private onGesture: GestureHandler | null = null;
  private onProgress: ProgressHandler | null = null;

  constructor(private readonly canvas: HTMLCanvasElement) {
    canvas.addEventListener("pointerdown", (e) => this.begin(e as PointerEvent));
    canvas.addEventListener("pointermove", (e) => this.extend(e as PointerEvent));
    canvas.addEventListener("pointerup", (e) => this.finish(e as PointerEvent));
    canvas.addEventListener("pointercancel", () => this.abort());
  }

  gestures(handler: GestureHandler): void {
    this.onGesture = handler;
  }

  progress(handler: ProgressHandler): void {
    this.onProgress = handler;
  }

  get width(): number {
    return this.canvas.width;
  }

  get height(): number {
    return this.canvas.height;
  }

  private toPoint(e: PointerLike): TracePoint {
    const rect = this.canvas.getBoundingClientRect();
    const scaleX = rect.width > 0 ? this.canvas.width / rect.width : 1;
    const scaleY = rect.height > 0 ? this.canvas.height / rect.height : 1;
    const x = (e.clientX - rect.left) * scaleX;
    const y = (e.clientY - rect.top) * scaleY;
    const size = e.width && e.width > 0
      ? e.width
      : e.pressure && e.pressure > 0
        ? e.pressure
        : DEFAULT_POINTER_SIZE;
    return {
      t_ms: e.timeStamp - this.startStamp,
      x_px: Math.min(Math.max(x, 0), this.canvas.width),
      y_px: Math.min(Math.max(y, 0), this.canvas.height),
      size,
    };
  }

  private begin(e: PointerLike): void {
    this.activePointer = e.pointerId ?? 0;
    this.startStamp = e.timeStamp;
    this.points = [];
    this.points.push(this.toPoint(e));
    this.report(true);
  }

  private extend(e: PointerLike): void {
    if (this.activePointer === null || (e.pointerId ?? 0) !== this.activePointer) return;
    this.points.push(this.toPoint(e));
    this.report(true);
  }

  private finish(e: PointerLike): void {
    if (this.activePointer === null || (e.pointerId ?? 0) !== this.activePointer) return;
    this.points.push(this.toPoint(e));
    const gesture: CompletedGesture = {
      points: this.points,
      dxFraction: this.dxFraction(),
    };
    this.report(false);
    this.activePointer = null;
    this.points = [];
    this.onGesture?.(gesture);
  }

  private abort(): void {
    this.activePointer = null;
    this.points = [];
    this.report(false);
  }

  private dxFraction(): number {
    if (this.points.length < 2) return 0;
    const first = this.points[0];
    const last = this.points[this.points.length - 1];
    return (last.x_px - first.x_px) / this.canvas.width;
  }

  private report(active: boolean): void {
    this.onProgress?.(this.dxFraction(), active);
  }
}

/** Estimate the native event rate from captured timestamps. */
export function estimateSampleRate(points: TracePoint[]): number {
  if (points.length < 2) return 60;
  const duration = points[points.length - 1].t_ms - points[0].t_ms;
  if (duration <= 0) return 60;
  return Math.min(Math.max(((points.length - 1) * 1000) / duration, 1), 1000);
}

export function gestureToTrace(
  gesture: CompletedGesture,
  canvas: { width: number; height: number },
  profileId: string,
  role: RawTrace["role"],
  attemptIndex: number,
): RawTrace {
  return {
    profile_id: profileId,
    role,
    attempt_index: attemptIndex,
    device: {
      width_px: canvas.width,
      height_px: canvas.height,
      sample_rate_hz: Math.round(estimateSampleRate(gesture.points) * 10) / 10,
    },
    points: gesture.points,
  };
}

/** The dialog only slides away on a sufficiently long horizontal swipe. */
export function dismissesDialog(gesture: CompletedGesture): boolean {
  return Math.abs(gesture.dxFraction) >= MIN_SWIPE_FRACTION;
}
