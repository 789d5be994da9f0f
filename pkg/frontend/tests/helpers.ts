/** Synthesized pointer-event swipes for driving GestureCapture in jsdom
 * (which implements neither PointerEvent nor event timestamps we control). */

export interface SyntheticPoint {
  t: number;
  x: number;
  y: number;
}

export function firePointer(
  target: EventTarget,
  type: string,
  point: SyntheticPoint,
  pointerId = 1,
): void {
  const event = new Event(type, { bubbles: true });
  Object.defineProperties(event, {
    pointerId: { value: pointerId },
    clientX: { value: point.x },
    clientY: { value: point.y },
    width: { value: 0 },
    pressure: { value: 0.4 },
    timeStamp: { value: point.t },
  });
  target.dispatchEvent(event);
}

/** A smooth rightward swipe across the canvas with slight per-run noise. */
export function swipePath(
  width: number,
  height: number,
  runIndex: number,
  nPoints = 40,
  durationMs = 400,
): SyntheticPoint[] {
  const jitter = (i: number) =>
    3 * Math.sin(0.7 * i + runIndex) + 2 * Math.cos(1.3 * i * (runIndex + 1));
  const points: SyntheticPoint[] = [];
  const x0 = 0.12 * width;
  const x1 = 0.88 * width;
  const y0 = 0.45 * height + 5 * runIndex;
  for (let i = 0; i < nPoints; i++) {
    const s = i / (nPoints - 1);
    points.push({
      t: (s * durationMs) + runIndex * 10_000,
      x: x0 + s * (x1 - x0) + jitter(i),
      y: Math.min(Math.max(y0 + 8 * s + jitter(i + 17) * 0.5, 0), height - 1),
    });
  }
  return points;
}

export function performSwipe(
  canvas: HTMLCanvasElement,
  points: SyntheticPoint[],
): void {
  firePointer(canvas, "pointerdown", points[0]);
  for (const p of points.slice(1, -1)) firePointer(canvas, "pointermove", p);
  firePointer(canvas, "pointerup", points[points.length - 1]);
}

export function makeCanvas(width = 540, height = 320): HTMLCanvasElement {
  const canvas = document.createElement("canvas");
  canvas.width = width;
  canvas.height = height;
  document.body.appendChild(canvas);
  return canvas;
}
