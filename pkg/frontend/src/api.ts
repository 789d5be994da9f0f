/** Thin client for the /v1/ scoring service. Every decision shown in the UI
 * comes verbatim from these responses; nothing is scored locally. */

import { RawTrace, assertValidTrace } from "./schema.js";

export interface ProfileStatus {
  profile_id: string;
  state: "enrolling" | "trained" | "failed_enrollment";
  model_type: string;
  enrolled_count: number;
  enrollment_target: number;
  threshold: number | null;
  failure_reason: string | null;
  component_count?: number;
}

export interface EnrollResponse extends ProfileStatus {
  training_outcome: string | null;
}

export interface Decision {
  score: number;
  threshold: number;
  accept: boolean;
  model_type: string;
}

export class ApiError extends Error {
  constructor(
    public readonly code: string,
    message: string,
    public readonly status: number,
  ) {
    super(message);
  }
}

async function parse<T>(response: Response): Promise<T> {
  const body = await response.json().catch(() => null);
  if (!response.ok) {
    const err = body?.error;
    throw new ApiError(err?.code ?? "transport", err?.message ?? response.statusText,
      response.status);
  }
  return body as T;
}

export class ApiClient {
  constructor(private readonly baseUrl: string = "") {}

  private url(path: string): string {
    return `${this.baseUrl}/v1/${path}`;
  }

  private async post<T>(path: string, payload: unknown): Promise<T> {
    const response = await fetch(this.url(path), {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(payload),
    });
    return parse<T>(response);
  }

  async createProfile(profileId: string): Promise<ProfileStatus> {
    return this.post<ProfileStatus>("profiles", { profile_id: profileId });
  }

  async status(profileId: string): Promise<ProfileStatus> {
    return parse<ProfileStatus>(await fetch(this.url(`profiles/${profileId}`)));
  }

  async ensureProfile(profileId: string): Promise<ProfileStatus> {
    try {
      return await this.status(profileId);
    } catch (err) {
      if (err instanceof ApiError && err.code === "not_found")
        return this.createProfile(profileId);
      throw err;
    }
  }

  async enroll(profileId: string, trace: RawTrace): Promise<EnrollResponse> {
    return this.post<EnrollResponse>(
      `profiles/${profileId}/enroll`, assertValidTrace(trace));
  }

  async authenticate(profileId: string, trace: RawTrace): Promise<Decision> {
    return this.post<Decision>(
      `profiles/${profileId}/authenticate`, assertValidTrace(trace));
  }

  async replays(profileId: string): Promise<RawTrace[]> {
    const body = await parse<{ traces: RawTrace[] }>(
      await fetch(this.url(`profiles/${profileId}/replays`)));
    return body.traces;
  }

  async deleteProfile(profileId: string): Promise<void> {
    const response = await fetch(this.url(`profiles/${profileId}`), { method: "DELETE" });
    if (!response.ok && response.status !== 404) {
      await parse(response);
    }
  }
}
