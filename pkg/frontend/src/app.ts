// Browser entry point: wires the queue controller, label form, keyboard
// shortcuts, and audio playback to the DOM. All state lives in the
// controller; this file only renders it.

import { ApiClient } from "./api.js";
import { LabelFormModel } from "./form.js";
import { renderRunHtml, escapeHtml } from "./highlight.js";
import { mapKey } from "./keyboard.js";
import { QueueController, type QueueState } from "./queue.js";
import type { CategoryInfo } from "./types.js";

const REVIEWER_STORAGE_KEY = "sttaudit.reviewer";
const POLL_INTERVAL_MS = 10_000;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function signalBadges(signals: string[]): string {
  return signals
    .map((s) => `<span class="badge badge-${escapeHtml(s)}">${escapeHtml(s)}</span>`)
    .join(" ");
}

export function startApp(baseUrl = ""): void {
  const api = new ApiClient(baseUrl);
  const form = new LabelFormModel();
  let vocabulary: CategoryInfo[] = [];
  const reviewerInput = el<HTMLInputElement>("reviewer");
  reviewerInput.value = localStorage.getItem(REVIEWER_STORAGE_KEY) ?? "default";

  const controller = new QueueController(api, render);

  function render(state: QueueState): void {
    el("count-pending").textContent = String(state.counts.pending);
    el("count-confirmed").textContent = String(state.counts.confirmed);
    el("count-rejected").textContent = String(state.counts.rejected);
    el("banner").hidden = !state.serviceDown;
    const errorBox = el("error");
    errorBox.textContent = state.error ?? "";
    errorBox.hidden = !state.error || state.serviceDown;

    const list = el("queue-list");
    list.innerHTML = state.queue
      .map(
        (c) => `
        <li data-id="${escapeHtml(c.candidate_id)}"
            class="${c.candidate_id === state.current?.candidate_id ? "selected" : ""}">
          <code>${escapeHtml(c.segment_id)}</code> ${signalBadges(c.signals)}
        </li>`,
      )
      .join("");
    list.querySelectorAll("li").forEach((item) => {
      item.addEventListener("click", () => {
        const id = item.getAttribute("data-id");
        if (id) void controller.select(id);
      });
    });

    const detail = el("candidate");
    if (!state.current) {
      detail.innerHTML =
        state.counts.pending === 0
          ? `<p class="empty">0 pending — queue is clear.</p>`
          : `<p class="empty">Select a candidate.</p>`;
      return;
    }
    const c = state.current;
    const runsHtml = c.runs
      .map(
        (run) => `
        <div class="run">
          <h4>run ${escapeHtml(run.run_tag)}</h4>
          <p class="transcript">${renderRunHtml(run.text, run.tokens, run.flagged_spans)}</p>
        </div>`,
      )
      .join("");
    const suggestionsHtml = c.suggestions
      .map(
        (s) =>
          `<button class="suggestion" data-category="${escapeHtml(s.category)}">
             ${escapeHtml(s.category)} (${s.score.toFixed(2)})
           </button>`,
      )
      .join(" ");
    detail.innerHTML = `
      <div class="meta">
        <code>${escapeHtml(c.candidate_id)}</code>
        ${signalBadges(c.signals)}
        <span class="status">${escapeHtml(c.status)}</span>
      </div>
      <h4>ground truth</h4>
      <p class="transcript truth">${escapeHtml(c.ground_truth.text)}</p>
      ${runsHtml}
      <audio id="audio" controls preload="none" src="${escapeHtml(api.audioUrl(c.audio_url))}"></audio>
      <div class="suggestions">${suggestionsHtml}</div>
    `;
    detail.querySelectorAll<HTMLButtonElement>(".suggestion").forEach((button) => {
      button.addEventListener("click", () => {
        const category = button.dataset.category;
        if (category) {
          form.toggleCategory(category);
          renderForm();
        }
      });
    });
    renderForm();
  }

  function renderForm(): void {
    el<HTMLButtonElement>("btn-confirm").classList.toggle("active", form.confirmed === true);
    el<HTMLButtonElement>("btn-reject").classList.toggle("active", form.confirmed === false);
    const box = el("categories");
    box.innerHTML = vocabulary
      .map((info, index) => {
        const checked = form.categories.has(info.category) ? "checked" : "";
        const disabled = form.categoriesEnabled ? "" : "disabled";
        return `<label class="${disabled}">
          <input type="checkbox" data-category="${escapeHtml(info.category)}"
                 ${checked} ${disabled}>
          <kbd>${index + 1}</kbd> ${escapeHtml(info.category)}
        </label>`;
      })
      .join("");
    box.querySelectorAll<HTMLInputElement>("input[type=checkbox]").forEach((input) => {
      input.addEventListener("change", () => {
        const category = input.dataset.category;
        if (category) form.toggleCategory(category);
        renderForm();
      });
    });
    el<HTMLButtonElement>("btn-submit").disabled = !form.valid;
  }

  async function submit(): Promise<void> {
    if (!form.valid) return;
    const reviewer = reviewerInput.value.trim() || "default";
    localStorage.setItem(REVIEWER_STORAGE_KEY, reviewer);
    const ok = await controller.adjudicate(form.build(reviewer));
    if (ok) {
      form.reset();
      renderForm();
    }
  }

  el("btn-confirm").addEventListener("click", () => {
    form.setDecision(true);
    renderForm();
  });
  el("btn-reject").addEventListener("click", () => {
    form.setDecision(false);
    renderForm();
  });
  el("btn-submit").addEventListener("click", () => void submit());
  el<HTMLTextAreaElement>("note").addEventListener("input", (event) => {
    form.note = (event.target as HTMLTextAreaElement).value;
  });
  el("btn-retry").addEventListener("click", () => void controller.load());

  document.addEventListener("keydown", (event) => {
    const target = event.target as HTMLElement;
    const inInput =
      target instanceof HTMLInputElement || target instanceof HTMLTextAreaElement;
    const action = mapKey({
      key: event.key,
      inInput,
      ctrlKey: event.ctrlKey,
      metaKey: event.metaKey,
    });
    if (!action) return;
    event.preventDefault();
    switch (action.kind) {
      case "decide":
        form.setDecision(action.confirmed);
        renderForm();
        break;
      case "toggle-category": {
        const info = vocabulary[action.index];
        if (info) form.toggleCategory(info.category);
        renderForm();
        break;
      }
      case "submit":
        void submit();
        break;
      case "next":
        void controller.selectOffset(1);
        break;
      case "previous":
        void controller.selectOffset(-1);
        break;
      case "play-audio": {
        const audio = document.getElementById("audio") as HTMLAudioElement | null;
        if (audio) void audio.play();
        break;
      }
    }
  });

  void api
    .categories()
    .then((payload) => {
      vocabulary = payload.categories;
      renderForm();
    })
    .catch(() => {
      // vocabulary arrives with the first successful load/refresh
    });
  void controller.load();
  setInterval(() => void controller.refresh(), POLL_INTERVAL_MS);
}

startApp();
