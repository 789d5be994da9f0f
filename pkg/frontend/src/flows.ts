/** Enroll, authenticate and attacker session controllers. Controllers own
 * the sequencing and tallies; rendering goes through a View callback so the
 * same code runs under the page and under tests. */

import { ApiClient, ApiError, Decision, ProfileStatus } from "./api.js";
import { CompletedGesture, dismissesDialog, gestureToTrace } from "./capture.js";
import { RawTrace } from "./schema.js";

export interface FlowView {
  showStatus(text: string): void;
  showProgress(done: number, target: number): void;
  showDecision?(decision: Decision): void;
  showReplay?(trace: RawTrace): Promise<void> | void;
}

export interface AttemptRecord {
  decision: Decision | null;
  error: string | null;
}

function describeError(err: unknown): string {
  if (err instanceof ApiError) return `${err.code}: ${err.message}`;
  return String(err);
}

export class EnrollFlow {
  private attempt = 0;

  constructor(
    private readonly api: ApiClient,
    private readonly profileId: string,
    private readonly canvas: { width: number; height: number },
    private readonly view: FlowView,
  ) {}

  /** Re-sync progress from the service (fresh page, reload mid-flow). */
  async restore(): Promise<ProfileStatus> {
    const status = await this.api.ensureProfile(this.profileId);
    this.attempt = status.enrolled_count;
    this.view.showProgress(status.enrolled_count, status.enrollment_target);
    this.view.showStatus(
      status.state === "trained"
        ? "profile already trained"
        : `enrolling: ${status.enrolled_count} of ${status.enrollment_target}`,
    );
    return status;
  }

  async handleGesture(gesture: CompletedGesture): Promise<ProfileStatus | null> {
    if (!dismissesDialog(gesture)) {
      this.view.showStatus("swipe further to slide the dialog away");
      return null;
    }
    const trace = gestureToTrace(
      gesture, this.canvas, this.profileId, "victim", this.attempt);
    try {
      const response = await this.api.enroll(this.profileId, trace);
      this.attempt = response.enrolled_count;
      this.view.showProgress(response.enrolled_count, response.enrollment_target);
      if (response.state === "trained") {
        this.view.showStatus("trained");
      } else if (response.state === "failed_enrollment") {
        this.view.showStatus(`enrollment failed: ${response.failure_reason}`);
      } else {
        this.view.showStatus(
          `enrolled ${response.enrolled_count} of ${response.enrollment_target}`);
      }
      return response;
    } catch (err) {
      // a quality rejection leaves the enrollment count unchanged
      this.view.showStatus(describeError(err));
      return null;
    }
  }
}

export class AuthenticateFlow {
  readonly history: AttemptRecord[] = [];
  private attempt = 0;

  constructor(
    private readonly api: ApiClient,
    private readonly profileId: string,
    private readonly canvas: { width: number; height: number },
    private readonly view: FlowView,
    private readonly role: RawTrace["role"] = "victim",
  ) {}

  async handleGesture(gesture: CompletedGesture): Promise<AttemptRecord | null> {
    if (!dismissesDialog(gesture)) {
      this.view.showStatus("swipe further to slide the dialog away");
      return null;
    }
    const trace = gestureToTrace(
      gesture, this.canvas, this.profileId, this.role, this.attempt);
    this.attempt += 1;
    let record: AttemptRecord;
    try {
      const decision = await this.api.authenticate(this.profileId, trace);
      record = { decision, error: null };
      this.view.showDecision?.(decision);
      this.view.showStatus(
        `${decision.accept ? "ACCEPT" : "REJECT"} ` +
        `(score ${decision.score.toFixed(2)}, threshold ${decision.threshold.toFixed(2)})`,
      );
    } catch (err) {
      record = { decision: null, error: describeError(err) };
      this.view.showStatus(describeError(err));
    }
    this.history.push(record);
    return record;
  }
}

export interface AttackTally {
  attempts: number;
  accepted: number;
}

export class AttackerFlow {
  readonly tally: AttackTally = { attempts: 0, accepted: 0 };
  private readonly auth: AuthenticateFlow;
  private replayCache: RawTrace[] | null = null;

  constructor(
    private readonly api: ApiClient,
    private readonly victimId: string,
    readonly mode: "blind" | "ots",
    canvas: { width: number; height: number },
    private readonly view: FlowView,
  ) {
    const role = mode === "blind" ? "blind_attacker" : "ots_attacker";
    this.auth = new AuthenticateFlow(api, victimId, canvas, view, role);
  }

  /** In OTS mode the attacker studies the victim's swipes before each
   * attempt; blind mode never touches the replay endpoint. */
  async observe(): Promise<RawTrace[]> {
    if (this.mode !== "ots") return [];
    if (this.replayCache === null) {
      this.replayCache = await this.api.replays(this.victimId);
    }
    for (const trace of this.replayCache) {
      await this.view.showReplay?.(trace);
    }
    return this.replayCache;
  }

  async handleGesture(gesture: CompletedGesture): Promise<AttemptRecord | null> {
    const record = await this.auth.handleGesture(gesture);
    if (record) {
      this.tally.attempts += 1;
      if (record.decision?.accept) this.tally.accepted += 1;
      this.view.showStatus(
        `${record.decision?.accept ? "ACCEPT" : "REJECT"} — attacker tally ` +
        `${this.tally.accepted}/${this.tally.attempts} accepted`,
      );
    }
    return record;
  }
}
