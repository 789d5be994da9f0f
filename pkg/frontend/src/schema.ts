/** Trace JSON shapes shared with the scoring service, plus validation so a
 * malformed capture never leaves the browser. */

export interface TracePoint {
  t_ms: number;
  x_px: number;
  y_px: number;
  size: number;
}

export interface RawTrace {
  profile_id: string;
  role: "victim" | "blind_attacker" | "ots_attacker";
  attempt_index: number;
  device: { width_px: number; height_px: number; sample_rate_hz: number };
  points: TracePoint[];
}

const ROLES = new Set(["victim", "blind_attacker", "ots_attacker"]);

function isFiniteNumber(v: unknown): v is number {
  return typeof v === "number" && Number.isFinite(v);
}

/** Returns a list of schema violations; empty means the trace is valid. */
export function traceProblems(trace: RawTrace): string[] {
  const problems: string[] = [];
  if (!trace.profile_id) problems.push("profile_id missing");
  if (!ROLES.has(trace.role)) problems.push(`unknown role ${trace.role}`);
  if (!Number.isInteger(trace.attempt_index) || trace.attempt_index < 0)
    problems.push("attempt_index must be a non-negative integer");
  const d = trace.device;
  if (!d || !Number.isInteger(d.width_px) || d.width_px <= 0)
    problems.push("device.width_px must be a positive integer");
  if (!d || !Number.isInteger(d.height_px) || d.height_px <= 0)
    problems.push("device.height_px must be a positive integer");
  if (!d || !isFiniteNumber(d.sample_rate_hz) || d.sample_rate_hz <= 0)
    problems.push("device.sample_rate_hz must be positive");
  if (!Array.isArray(trace.points) || trace.points.length < 2) {
    problems.push("at least 2 points required");
    return problems;
  }
  let lastT = -Infinity;
  for (const p of trace.points) {
    if (!isFiniteNumber(p.t_ms) || !isFiniteNumber(p.x_px) || !isFiniteNumber(p.y_px))
      problems.push("non-finite point fields");
    if (p.t_ms < lastT) problems.push("timestamps decrease");
    if (p.x_px < 0 || p.x_px > d.width_px || p.y_px < 0 || p.y_px > d.height_px)
      problems.push("point outside device bounds");
    if (!isFiniteNumber(p.size) || p.size < 0) problems.push("bad pointer size");
    lastT = p.t_ms;
    if (problems.length) break;
  }
  return problems;
}

export function assertValidTrace(trace: RawTrace): RawTrace {
  const problems = traceProblems(trace);
  if (problems.length) throw new Error(`invalid trace: ${problems.join("; ")}`);
  return trace;
}
