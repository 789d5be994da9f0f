/** Page wiring: mode tabs, the slide-away dialog canvas, and the session
 * log. All scoring happens on the service; this file only renders. */

import { ApiClient, Decision } from "./api.js";
import { GestureCapture, MIN_SWIPE_FRACTION } from "./capture.js";
import { AttackerFlow, AuthenticateFlow, EnrollFlow, FlowView } from "./flows.js";
import { animateReplay, clearCanvas } from "./replay.js";
import { RawTrace } from "./schema.js";

type Mode = "enroll" | "authenticate" | "attacker-blind" | "attacker-ots";

function byId<T extends HTMLElement>(id: string): T {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
}

class DialogRenderer {
  constructor(private readonly canvas: HTMLCanvasElement) {}

  draw(dxFraction: number): void {
    const ctx = this.canvas.getContext("2d");
    if (!ctx) return;
    const { width, height } = this.canvas;
    ctx.clearRect(0, 0, width, height);
    ctx.fillStyle = "#f1f3f5";
    ctx.fillRect(0, 0, width, height);

    const cardWidth = width * 0.7;
    const cardHeight = height * 0.42;
    const x = (width - cardWidth) / 2 + dxFraction * width;
    const y = (height - cardHeight) / 2;
    ctx.fillStyle = "#ffffff";
    ctx.strokeStyle = "#495057";
    ctx.lineWidth = 2;
    ctx.beginPath();
    ctx.roundRect(x, y, cardWidth, cardHeight, 14);
    ctx.fill();
    ctx.stroke();

    ctx.fillStyle = "#343a40";
    ctx.font = "20px system-ui, sans-serif";
    ctx.textAlign = "center";
    ctx.fillText("Swipe the dialog off the screen", x + cardWidth / 2, y + cardHeight / 2 - 10);
    ctx.font = "14px system-ui, sans-serif";
    ctx.fillStyle = "#868e96";
    ctx.fillText(
      `(at least ${Math.round(MIN_SWIPE_FRACTION * 100)}% of the width)`,
      x + cardWidth / 2,
      y + cardHeight / 2 + 18,
    );
  }
}

function main(): void {
  const canvas = byId<HTMLCanvasElement>("swipe-canvas");
  const statusEl = byId<HTMLElement>("status");
  const progressEl = byId<HTMLElement>("progress");
  const historyEl = byId<HTMLUListElement>("history");
  const profileInput = byId<HTMLInputElement>("profile-id");
  const victimInput = byId<HTMLInputElement>("victim-id");
  const modeSelect = byId<HTMLSelectElement>("mode");
  const startButton = byId<HTMLButtonElement>("start");
  const observeButton = byId<HTMLButtonElement>("observe");

  const api = new ApiClient("");
  const capture = new GestureCapture(canvas);
  const dialog = new DialogRenderer(canvas);
  dialog.draw(0);

  const view: FlowView = {
    showStatus(text: string): void {
      statusEl.textContent = text;
    },
    showProgress(done: number, target: number): void {
      progressEl.textContent = `${done} / ${target}`;
    },
    showDecision(decision: Decision): void {
      const item = document.createElement("li");
      item.textContent =
        `${decision.accept ? "ACCEPT" : "REJECT"} score=${decision.score.toFixed(2)} ` +
        `threshold=${decision.threshold.toFixed(2)} (${decision.model_type})`;
      item.className = decision.accept ? "accept" : "reject";
      historyEl.prepend(item);
    },
    async showReplay(trace: RawTrace): Promise<void> {
      clearCanvas(canvas);
      await animateReplay(canvas, trace);
      await new Promise((r) => setTimeout(r, 250));
      dialog.draw(0);
    },
  };

  let enroll: EnrollFlow | null = null;
  let authenticate: AuthenticateFlow | null = null;
  let attacker: AttackerFlow | null = null;

  async function start(): Promise<void> {
    const mode = modeSelect.value as Mode;
    const profileId = profileInput.value.trim();
    const victimId = victimInput.value.trim();
    historyEl.replaceChildren();
    enroll = authenticate = attacker = null;
    observeButton.hidden = mode !== "attacker-ots";
    try {
      if (mode === "enroll") {
        enroll = new EnrollFlow(api, profileId, canvas, view);
        const status = await enroll.restore();
        if (status.state === "trained") {
          view.showStatus("profile already trained; switch to authenticate");
        }
      } else if (mode === "authenticate") {
        const status = await api.status(profileId);
        if (status.state !== "trained") {
          view.showStatus("profile not trained yet; complete enrollment first");
          modeSelect.value = "enroll";
          return start();
        }
        authenticate = new AuthenticateFlow(api, profileId, canvas, view);
        view.showStatus("trained profile ready: swipe to authenticate");
      } else {
        // attacker modes target the victim's profile; blind mode shows no
        // victim information at all
        const target = victimId || profileId;
        attacker = new AttackerFlow(
          api, target, mode === "attacker-ots" ? "ots" : "blind", canvas, view);
        view.showStatus(
          mode === "attacker-ots"
            ? "press Observe to watch the victim, then swipe to attack"
            : "blind attack: swipe without any victim information",
        );
      }
    } catch (err) {
      view.showStatus(String(err));
    }
  }

  startButton.addEventListener("click", () => void start());
  observeButton.addEventListener("click", () => void attacker?.observe());

  capture.progress((dx, active) => dialog.draw(active ? dx : 0));
  capture.gestures((gesture) => {
    void (async () => {
      if (enroll) await enroll.handleGesture(gesture);
      else if (authenticate) await authenticate.handleGesture(gesture);
      else if (attacker) await attacker.handleGesture(gesture);
      else view.showStatus("press Start to begin a session");
      dialog.draw(0);
    })();
  });
}

document.addEventListener("DOMContentLoaded", main);
