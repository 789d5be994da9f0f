import { beforeEach, describe, expect, it } from "vitest";

import {
  GestureCapture,
  dismissesDialog,
  estimateSampleRate,
  gestureToTrace,
} from "../src/capture.js";
import { traceProblems } from "../src/schema.js";
import { CompletedGesture } from "../src/capture.js";
import { makeCanvas, performSwipe, swipePath, firePointer } from "./helpers.js";

describe("GestureCapture", () => {
  let canvas: HTMLCanvasElement;
  let capture: GestureCapture;
  let gestures: CompletedGesture[];

  beforeEach(() => {
    document.body.innerHTML = "";
    canvas = makeCanvas();
    capture = new GestureCapture(canvas);
    gestures = [];
    capture.gestures((g) => gestures.push(g));
  });

  it("captures pointer-down to pointer-up as one gesture", () => {
    performSwipe(canvas, swipePath(canvas.width, canvas.height, 0));
    expect(gestures).toHaveLength(1);
    expect(gestures[0].points.length).toBe(40);
  });

  it("produces schema-valid traces with monotone relative timestamps", () => {
    performSwipe(canvas, swipePath(canvas.width, canvas.height, 3));
    const trace = gestureToTrace(gestures[0], canvas, "alice", "victim", 0);
    expect(traceProblems(trace)).toEqual([]);
    expect(trace.points[0].t_ms).toBe(0);
    expect(trace.device.width_px).toBe(540);
    expect(trace.device.height_px).toBe(320);
  });

  it("ignores moves from other pointers", () => {
    const path = swipePath(canvas.width, canvas.height, 1);
    firePointer(canvas, "pointerdown", path[0], 1);
    firePointer(canvas, "pointermove", path[1], 2); // different finger
    firePointer(canvas, "pointermove", path[2], 1);
    firePointer(canvas, "pointerup", path[3], 1);
    expect(gestures[0].points.length).toBe(3);
  });

  it("reports progress while active", () => {
    const seen: Array<[number, boolean]> = [];
    capture.progress((dx, active) => seen.push([dx, active]));
    performSwipe(canvas, swipePath(canvas.width, canvas.height, 2));
    expect(seen.some(([, active]) => active)).toBe(true);
    expect(seen[seen.length - 1][1]).toBe(false);
  });

  it("clamps coordinates to the canvas", () => {
    firePointer(canvas, "pointerdown", { t: 0, x: -40, y: 10 });
    firePointer(canvas, "pointermove", { t: 10, x: 200, y: 9999 });
    firePointer(canvas, "pointerup", { t: 20, x: 640, y: 10 });
    const points = gestures[0].points;
    expect(points[0].x_px).toBe(0);
    expect(points[1].y_px).toBe(320);
    expect(points[2].x_px).toBe(540);
  });

  it("falls back to a constant pointer size when none is reported", () => {
    const path = swipePath(canvas.width, canvas.height, 0, 5);
    firePointer(canvas, "pointerdown", path[0]);
    const bare = new Event("pointerup", { bubbles: true });
    Object.defineProperties(bare, {
      pointerId: { value: 1 },
      clientX: { value: path[4].x },
      clientY: { value: path[4].y },
      timeStamp: { value: path[4].t },
    });
    canvas.dispatchEvent(bare);
    const sizes = gestures[0].points.map((p) => p.size);
    expect(sizes[sizes.length - 1]).toBeGreaterThan(0);
  });
});

describe("gesture helpers", () => {
  it("dialog dismissal needs a fifth of the width", () => {
    const short: CompletedGesture = { points: [], dxFraction: 0.19 };
    const enough: CompletedGesture = { points: [], dxFraction: 0.2 };
    const leftward: CompletedGesture = { points: [], dxFraction: -0.5 };
    expect(dismissesDialog(short)).toBe(false);
    expect(dismissesDialog(enough)).toBe(true);
    expect(dismissesDialog(leftward)).toBe(true);
  });

  it("estimates the native event rate from timestamps", () => {
    const points = Array.from({ length: 41 }, (_, i) => ({
      t_ms: i * 10, x_px: i, y_px: 0, size: 0.3,
    }));
    expect(estimateSampleRate(points)).toBeCloseTo(100, 5);
  });
});
