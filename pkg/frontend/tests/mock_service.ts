/** In-memory stand-in for the scoring service, installed as a fetch mock.
 * Mirrors the /v1/ contract closely enough to drive the flows hermetically. */

import { vi } from "vitest";

import { RawTrace } from "../src/schema.js";

interface MockProfile {
  state: "enrolling" | "trained" | "failed_enrollment";
  traces: RawTrace[];
  target: number;
}

export class MockService {
  profiles = new Map<string, MockProfile>();
  replayRequests: string[] = [];
  acceptNext = true;

  install(): void {
    vi.stubGlobal("fetch", (url: string | URL, init?: RequestInit) =>
      Promise.resolve(this.route(String(url), init)));
  }

  private json(status: number, body: unknown): Response {
    return new Response(JSON.stringify(body), {
      status,
      headers: { "Content-Type": "application/json" },
    });
  }

  private error(status: number, code: string, message = code): Response {
    return this.json(status, { error: { code, message } });
  }

  private route(url: string, init?: RequestInit): Response {
    const path = url.replace(/^https?:\/\/[^/]+/, "");
    const body = init?.body ? JSON.parse(String(init.body)) : null;
    const method = init?.method ?? "GET";

    if (path === "/v1/profiles" && method === "POST") {
      const id = body.profile_id;
      if (this.profiles.has(id)) return this.error(409, "already_exists");
      this.profiles.set(id, { state: "enrolling", traces: [], target: 10 });
      return this.json(201, this.status(id));
    }

    const match = path.match(/^\/v1\/profiles\/([^/]+)(?:\/(\w+))?$/);
    if (!match) return this.error(404, "not_found");
    const [, id, action] = match;
    const profile = this.profiles.get(id);
    if (!profile) return this.error(404, "not_found");

    if (!action && method === "GET") return this.json(200, this.status(id));
    if (!action && method === "DELETE") {
      this.profiles.delete(id);
      return new Response(null, { status: 204 });
    }
    if (action === "enroll") {
      if (profile.state !== "enrolling") return this.error(409, "not_enrolling");
      if (body.points.length < 8) return this.error(422, "quality_reject");
      profile.traces.push(body);
      if (profile.traces.length >= profile.target) profile.state = "trained";
      return this.json(200, {
        ...this.status(id),
        training_outcome: profile.state === "enrolling" ? null : profile.state,
      });
    }
    if (action === "authenticate") {
      if (profile.state !== "trained") return this.error(409, "not_ready");
      const accept = this.acceptNext;
      return this.json(200, {
        score: accept ? -50.0 : -500.0,
        threshold: -100.0,
        accept,
        model_type: "shrunk",
      });
    }
    if (action === "replays") {
      this.replayRequests.push(id);
      return this.json(200, { profile_id: id, traces: profile.traces });
    }
    return this.error(404, "not_found");
  }

  private status(id: string) {
    const profile = this.profiles.get(id)!;
    return {
      profile_id: id,
      state: profile.state,
      model_type: "shrunk",
      enrolled_count: profile.traces.length,
      enrollment_target: profile.target,
      threshold: profile.state === "trained" ? -100.0 : null,
      failure_reason: null,
    };
  }
}
