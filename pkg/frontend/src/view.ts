/**
 * DOM rendering. Every label, score, path and explanation shown here is
 * copied verbatim from a service response field; the only text the view
 * adds are fixed control captions and headings. The Socratic question
 * leads each turn, with scores collapsed behind a details toggle.
 */

import type { Action, AgentTurn, Candidate, ResolvedEntity } from "./api.js";

export const PHASE_TITLES: Record<string, string> = {
  broad_exploration: "Broad exploration",
  specialized_drilldown: "Specialized drill-down",
  finalized: "Finalized",
};

export type ActionHandler = (action: Action) => void;

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export function renderPhaseBadge(phase: string): HTMLElement {
  const badge = el("span", "phase-badge", PHASE_TITLES[phase] ?? phase);
  badge.dataset.phase = phase;
  return badge;
}

function scoreBreakdown(candidate: Candidate): HTMLElement {
  const details = el("details", "score-breakdown");
  details.appendChild(el("summary", "", "score breakdown"));
  const table = el("table");
  const head = el("tr");
  for (const caption of ["part", "d", "decay", "sim", "contribution"]) {
    head.appendChild(el("th", "", caption));
  }
  table.appendChild(head);

  const baseRow = el("tr", "row-base");
  baseRow.appendChild(el("td", "", "query-topic similarity"));
  baseRow.appendChild(el("td"));
  baseRow.appendChild(el("td"));
  baseRow.appendChild(el("td"));
  baseRow.appendChild(el("td", "", candidate.base_sim.toFixed(4)));
  table.appendChild(baseRow);

  for (const row of candidate.ancestors) {
    const tr = el("tr", "row-ancestor");
    tr.appendChild(el("td", "", row.id));
    tr.appendChild(el("td", "", String(row.d)));
    tr.appendChild(el("td", "", row.decay.toFixed(4)));
    tr.appendChild(el("td", "", row.sim.toFixed(4)));
    tr.appendChild(el("td", "", row.contribution.toFixed(4)));
    table.appendChild(tr);
  }
  for (const row of candidate.siblings) {
    const tr = el("tr", "row-sibling");
    tr.appendChild(el("td", "", row.id));
    tr.appendChild(el("td"));
    tr.appendChild(el("td"));
    tr.appendChild(el("td", "", row.sim.toFixed(4)));
    tr.appendChild(el("td"));
    table.appendChild(tr);
  }
  const totals = el("tr", "row-totals");
  totals.appendChild(el("td", "", "ancestor bonus / sibling bonus"));
  totals.appendChild(el("td"));
  totals.appendChild(el("td"));
  totals.appendChild(el("td", "", candidate.ancestor_bonus.toFixed(4)));
  totals.appendChild(el("td", "", candidate.sibling_bonus.toFixed(4)));
  table.appendChild(totals);
  details.appendChild(table);
  return details;
}

const CARD_ACTIONS: ReadonlyArray<[Action["kind"], string]> = [
  ["confirm", "Confirm"],
  ["reject", "Reject"],
  ["broaden", "Broaden"],
  ["narrow", "Narrow"],
  ["explore_siblings", "Siblings"],
];

export function renderCandidateCard(candidate: Candidate, onAction: ActionHandler): HTMLElement {
  const card = el("article", "candidate-card");
  card.dataset.topicId = candidate.topic_id;
  card.dataset.schemeId = candidate.scheme_id;

  const title = el("h3", "candidate-label", candidate.pref_label);
  title.appendChild(el("span", "candidate-score", candidate.final_score.toFixed(4)));
  card.appendChild(title);
  card.appendChild(el("nav", "breadcrumb", candidate.breadcrumb.join(" > ")));
  card.appendChild(el("p", "explanation", candidate.explanation));
  card.appendChild(scoreBreakdown(candidate));

  const controls = el("div", "card-actions");
  for (const [kind, caption] of CARD_ACTIONS) {
    const button = el("button", "action-btn", caption);
    button.dataset.kind = kind;
    button.addEventListener("click", () =>
      onAction({ kind, topic_id: candidate.topic_id, scheme_id: candidate.scheme_id }),
    );
    controls.appendChild(button);
  }
  card.appendChild(controls);
  return card;
}

export function renderTurn(turn: AgentTurn, onAction: ActionHandler): HTMLElement {
  const section = el("section", "turn");
  section.dataset.round = String(turn.round);
  if (turn.notice) {
    section.appendChild(el("p", "notice", turn.notice));
  }
  section.appendChild(el("h2", "question", turn.question));
  const cards = el("div", "cards");
  for (const candidate of turn.candidates) {
    cards.appendChild(renderCandidateCard(candidate, onAction));
  }
  section.appendChild(cards);
  return section;
}

export function renderTranscriptAction(action: Action): HTMLElement {
  const entry = el("div", "transcript-action");
  const pieces: string[] = [action.kind];
  if (action.topic_id) pieces.push(action.topic_id);
  if (action.text) pieces.push(`"${action.text}"`);
  entry.textContent = pieces.join(" ");
  return entry;
}

export function renderTranscriptTurn(turn: AgentTurn): HTMLElement {
  const entry = el("div", "transcript-turn");
  entry.appendChild(el("span", "transcript-phase", PHASE_TITLES[turn.phase] ?? turn.phase));
  entry.appendChild(el("span", "transcript-question", turn.question));
  const shown = el("span", "transcript-candidates");
  shown.textContent = turn.candidates.map((c) => c.pref_label).join(" | ");
  entry.appendChild(shown);
  return entry;
}

export function renderEntitiesPanel(entities: ResolvedEntity[]): HTMLElement {
  const panel = el("section", "entities-panel");
  panel.appendChild(el("h2", "", "Resolved entities"));
  if (entities.length === 0) {
    panel.appendChild(el("p", "entities-empty", "No entities resolved."));
    return panel;
  }
  const list = el("ul");
  for (const entity of entities) {
    const item = el("li", "entity");
    item.dataset.topicId = entity.topic_id;
    item.appendChild(el("span", "entity-label", entity.pref_label));
    item.appendChild(el("code", "entity-id", `${entity.scheme_id}/${entity.topic_id}`));
    item.appendChild(el("span", "entity-confidence", entity.confidence.toFixed(4)));
    list.appendChild(item);
  }
  panel.appendChild(list);
  return panel;
}

export function renderErrorBanner(message: string, onRetry?: () => void): HTMLElement {
  const banner = el("div", "error-banner", message);
  if (onRetry) {
    const retry = el("button", "retry-btn", "Retry");
    retry.addEventListener("click", onRetry);
    banner.appendChild(retry);
  }
  return banner;
}

export function renderInlineNotice(message: string): HTMLElement {
  return el("div", "inline-notice", message);
}
