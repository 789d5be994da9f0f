/** Animated replay of a victim's enrollment swipes for the OTS attacker. */

import { RawTrace } from "./schema.js";

function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}

export async function animateReplay(
  canvas: HTMLCanvasElement,
  trace: RawTrace,
  speedup = 2,
): Promise<void> {
  const ctx = canvas.getContext("2d");
  if (!ctx) return; // headless test environments
  const scaleX = canvas.width / trace.device.width_px;
  const scaleY = canvas.height / trace.device.height_px;
  ctx.save();
  ctx.strokeStyle = "#2b8a3e";
  ctx.lineWidth = 3;
  ctx.beginPath();
  const points = trace.points;
  ctx.moveTo(points[0].x_px * scaleX, points[0].y_px * scaleY);
  for (let i = 1; i < points.length; i++) {
    ctx.lineTo(points[i].x_px * scaleX, points[i].y_px * scaleY);
    ctx.stroke();
    const dt = points[i].t_ms - points[i - 1].t_ms;
    if (dt > 0) await sleep(dt / speedup);
  }
  // end-point marker
  const last = points[points.length - 1];
  ctx.fillStyle = "#2b8a3e";
  ctx.beginPath();
  ctx.arc(last.x_px * scaleX, last.y_px * scaleY, 5, 0, 2 * Math.PI);
  ctx.fill();
  ctx.restore();
}

export function clearCanvas(canvas: HTMLCanvasElement): void {
  canvas.getContext("2d")?.clearRect(0, 0, canvas.width, canvas.height);
}
