/**
 * Controller: owns session state, serializes step requests (one in
 * flight per session), and keeps the transcript append-only. API errors
 * surface as inline notices; connection failures as a retry banner.
 */

import { Action, AgentTurn, ApiError, ConnectionError, TopikosClient } from "./api.js";
import {
  PHASE_TITLES,
  renderEntitiesPanel,
  renderErrorBanner,
  renderInlineNotice,
  renderPhaseBadge,
  renderTranscriptAction,
  renderTranscriptTurn,
  renderTurn,
} from "./view.js";

export class App {
  private sessionId = "";
  private phase = "";
  private inFlight = false;
  private currentTurn: AgentTurn | null = null;

  private badgeSlot!: HTMLElement;
  private bannerSlot!: HTMLElement;
  private noticeSlot!: HTMLElement;
  private transcript!: HTMLElement;
  private turnSlot!: HTMLElement;
  private entitiesSlot!: HTMLElement;
  private queryInput!: HTMLInputElement;
  private refineInput!: HTMLInputElement;

  constructor(
    private readonly root: HTMLElement,
    private readonly client: TopikosClient,
  ) {}

  mount(): void {
    this.root.innerHTML = "";

    const header = document.createElement("header");
    const title = document.createElement("h1");
    title.textContent = "topikos";
    header.appendChild(title);
    this.badgeSlot = document.createElement("span");
    this.badgeSlot.className = "badge-slot";
    header.appendChild(this.badgeSlot);
    this.root.appendChild(header);

    this.bannerSlot = document.createElement("div");
    this.bannerSlot.className = "banner-slot";
    this.root.appendChild(this.bannerSlot);

    const queryBar = document.createElement("form");
    queryBar.className = "query-bar";
    this.queryInput = document.createElement("input");
    this.queryInput.placeholder = "Describe your research topic";
    this.queryInput.className = "query-input";
    const startBtn = document.createElement("button");
    startBtn.textContent = "Start";
    startBtn.className = "start-btn";
    queryBar.appendChild(this.queryInput);
    queryBar.appendChild(startBtn);
    queryBar.addEventListener("submit", (event) => {
      event.preventDefault();
      void this.start(this.queryInput.value);
    });
    this.root.appendChild(queryBar);

    this.noticeSlot = document.createElement("div");
    this.noticeSlot.className = "notice-slot";
    this.root.appendChild(this.noticeSlot);

    this.transcript = document.createElement("section");
    this.transcript.className = "transcript";
    this.root.appendChild(this.transcript);

    this.turnSlot = document.createElement("section");
    this.turnSlot.className = "turn-slot";
    this.root.appendChild(this.turnSlot);

    const refineBar = document.createElement("form");
    refineBar.className = "refine-bar";
    this.refineInput = document.createElement("input");
    this.refineInput.placeholder = "Refine your description";
    this.refineInput.className = "refine-input";
    const refineBtn = document.createElement("button");
    refineBtn.textContent = "Refine";
    refineBtn.className = "action-btn refine-btn";
    const doneBtn = document.createElement("button");
    doneBtn.textContent = "Done";
    doneBtn.className = "action-btn done-btn";
    doneBtn.type = "button";
    refineBar.appendChild(this.refineInput);
    refineBar.appendChild(refineBtn);
    refineBar.appendChild(doneBtn);
    refineBar.addEventListener("submit", (event) => {
      event.preventDefault();
      const text = this.refineInput.value.trim();
      if (text) {
        this.refineInput.value = "";
        void this.act({ kind: "refine", text });
      }
    });
    doneBtn.addEventListener("click", () => void this.done());
    this.root.appendChild(refineBar);

    this.entitiesSlot = document.createElement("section");
    this.entitiesSlot.className = "entities-slot";
    this.root.appendChild(this.entitiesSlot);
  }

  /** Open a session. Empty queries never reach the network. */
  async start(query: string): Promise<void> {
    this.clearMessages();
    if (!query.trim()) {
      this.noticeSlot.appendChild(renderInlineNotice("Please enter a topic description first."));
      return;
    }
    try {
      const created = await this.client.createSession(query);
      this.sessionId = created.session_id;
      this.showTurn(created.turn);
    } catch (err) {
      this.showError(err, () => void this.start(query));
    }
  }

  /** One step; buttons stay disabled until the response lands. */
  async act(action: Action): Promise<void> {
    if (!this.sessionId || this.inFlight) return;
    this.clearMessages();
    this.setInFlight(true);
    try {
      const turn = await this.client.step(this.sessionId, action);
      this.archiveCurrentTurn(action);
      this.showTurn(turn);
    } catch (err) {
      this.showError(err, undefined);
    } finally {
      this.setInFlight(false);
    }
  }

  async done(): Promise<void> {
    if (!this.sessionId || this.inFlight) return;
    this.clearMessages();
    this.setInFlight(true);
    try {
      const turn = await this.client.finalize(this.sessionId);
      this.archiveCurrentTurn({ kind: "done" });
      this.showTurn(turn);
      const resolution = await this.client.resolution(this.sessionId);
      this.entitiesSlot.innerHTML = "";
      this.entitiesSlot.appendChild(renderEntitiesPanel(resolution.entities));
    } catch (err) {
      this.showError(err, undefined);
    } finally {
      this.setInFlight(false);
    }
  }

  private showTurn(turn: AgentTurn): void {
    if (this.phase && turn.phase !== this.phase) {
      const transition = renderInlineNotice(
        `Phase changed: ${PHASE_TITLES[this.phase] ?? this.phase} -> ${PHASE_TITLES[turn.phase] ?? turn.phase}`,
      );
      transition.classList.add("phase-transition");
      this.noticeSlot.appendChild(transition);
    }
    this.phase = turn.phase;
    this.badgeSlot.innerHTML = "";
    this.badgeSlot.appendChild(renderPhaseBadge(turn.phase));
    this.currentTurn = turn;
    this.turnSlot.innerHTML = "";
    this.turnSlot.appendChild(renderTurn(turn, (action) => void this.act(action)));
  }

  private archiveCurrentTurn(action: Action): void {
    if (this.currentTurn) {
      this.transcript.appendChild(renderTranscriptTurn(this.currentTurn));
    }
    this.transcript.appendChild(renderTranscriptAction(action));
  }

  private setInFlight(value: boolean): void {
    this.inFlight = value;
    for (const button of this.root.querySelectorAll<HTMLButtonElement>(".action-btn, .start-btn")) {
      button.disabled = value;
    }
  }

  private showError(err: unknown, retry: (() => void) | undefined): void {
    if (err instanceof ConnectionError) {
      this.bannerSlot.appendChild(renderErrorBanner("Cannot reach the topikos service.", retry));
    } else if (err instanceof ApiError) {
      this.noticeSlot.appendChild(renderInlineNotice(`${err.code}: ${err.message}`));
    } else {
      this.noticeSlot.appendChild(renderInlineNotice(String(err)));
    }
  }

  private clearMessages(): void {
    this.bannerSlot.innerHTML = "";
    this.noticeSlot.innerHTML = "";
  }
}
