// DOM layer: pure functions from state to elements. Everything shown is
// taken verbatim from server responses.

import { AuditRecord, Outcome, WorkItem } from './api.js';
import { InboxState, ResolveExtras } from './inbox.js';

export type ResolveHandler = (
  requestId: string,
  outcome: Outcome,
  extras: ResolveExtras,
) => void;

export interface InboxHandlers {
  onResolve: ResolveHandler;
  onShowAudit: (requestId: string) => void;
  onRetry: () => void;
}

export function relativeTime(iso: string, now: Date = new Date()): string {
  const then = new Date(iso).getTime();
  if (Number.isNaN(then)) return iso;
  const seconds = Math.max(0, Math.round((now.getTime() - then) / 1000));
  if (seconds < 60) return `${seconds}s ago`;
  if (seconds < 3600) return `${Math.floor(seconds / 60)}m ago`;
  if (seconds < 86400) return `${Math.floor(seconds / 3600)}h ago`;
  return `${Math.floor(seconds / 86400)}d ago`;
}

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

function factsTable(facts: Record<string, unknown>): HTMLElement {
  const table = el('table', 'facts');
  for (const [key, value] of Object.entries(facts)) {
    const row = el('tr');
    row.appendChild(el('td', 'fact-key', key));
    row.appendChild(el('td', 'fact-value', JSON.stringify(value)));
    table.appendChild(row);
  }
  return table;
}

function parseScalar(text: string): unknown {
  try {
    return JSON.parse(text);
  } catch {
    return text;
  }
}

function enrichmentFrom(card: HTMLElement): Record<string, unknown> | undefined {
  const entries: [string, unknown][] = [];
  card.querySelectorAll<HTMLElement>('.enrichment-row').forEach((row) => {
    const key = row.querySelector<HTMLInputElement>('.enrichment-key')?.value.trim();
    const value = row.querySelector<HTMLInputElement>('.enrichment-value')?.value ?? '';
    if (key) entries.push([key, parseScalar(value)]);
  });
  return entries.length ? Object.fromEntries(entries) : undefined;
}

function commentFrom(card: HTMLElement): string | undefined {
  const comment = card.querySelector<HTMLInputElement>('.comment-input')?.value.trim();
  return comment ? comment : undefined;
}

function workItemCard(item: WorkItem, handlers: InboxHandlers): HTMLElement {
  const card = el('article', `card urgency-${item.urgency}`);
  card.dataset.requestId = item.request_id;

  const header = el('header', 'card-header');
  header.appendChild(el('span', 'badge', item.urgency));
  header.appendChild(el('span', 'action-name', item.proposed_action.name));
  header.appendChild(el('span', 'agent', `from ${item.agent_id}`));
  header.appendChild(el('span', 'age', relativeTime(item.created_at)));
  card.appendChild(header);

  const fields = el('dl', 'action-fields');
  for (const [name, value] of Object.entries(item.proposed_action.fields)) {
    fields.appendChild(el('dt', 'field-name', name));
    const dd = el('dd', 'field-value', JSON.stringify(value));
    dd.dataset.field = name;
    fields.appendChild(dd);
  }
  card.appendChild(fields);

  card.appendChild(factsTable(item.facts));
  card.appendChild(el('p', 'reason', `gated by: ${item.reason ?? 'n/a'}`));
  if (item.defer_count > 0) {
    card.appendChild(el('p', 'defer-count', `deferred ${item.defer_count}x`));
  }

  const extrasBlock = el('div', 'extras');
  const enrichmentRow = el('div', 'enrichment-row');
  const keyInput = el('input', 'enrichment-key');
  keyInput.placeholder = 'context key';
  const valueInput = el('input', 'enrichment-value');
  valueInput.placeholder = 'value';
  enrichmentRow.appendChild(keyInput);
  enrichmentRow.appendChild(valueInput);
  extrasBlock.appendChild(enrichmentRow);
  const commentInput = el('input', 'comment-input');
  commentInput.placeholder = 'comment (optional)';
  extrasBlock.appendChild(commentInput);
  card.appendChild(extrasBlock);

  const actions = el('div', 'actions');
  const simpleOutcomes: Outcome[] = ['approve', 'reject', 'defer'];
  for (const outcome of simpleOutcomes) {
    const button = el('button', `btn btn-${outcome}`, outcome);
    button.addEventListener('click', () =>
      handlers.onResolve(item.request_id, outcome, {
        enrichment: enrichmentFrom(card),
        comment: commentFrom(card),
      }),
    );
    actions.appendChild(button);
  }
  const modifyButton = el('button', 'btn btn-modify', 'modify');
  modifyButton.addEventListener('click', () => toggleModifyForm(card, item, handlers));
  actions.appendChild(modifyButton);
  const auditButton = el('button', 'btn btn-audit', 'audit');
  auditButton.addEventListener('click', () => handlers.onShowAudit(item.request_id));
  actions.appendChild(auditButton);
  card.appendChild(actions);
  return card;
}

function toggleModifyForm(card: HTMLElement, item: WorkItem, handlers: InboxHandlers): void {
  const existing = card.querySelector('.modify-form');
  if (existing) {
    existing.remove();
    return;
  }
  const form = el('div', 'modify-form');
  const inputs = new Map<string, HTMLInputElement>();
  for (const [name, value] of Object.entries(item.proposed_action.fields)) {
    const label = el('label', 'modify-field', `${name}: `);
    const input = el('input', 'modify-input');
    input.value = JSON.stringify(value);
    input.dataset.field = name;
    inputs.set(name, input);
    label.appendChild(input);
    form.appendChild(label);
  }
  const save = el('button', 'btn btn-save-modify', 'save modification');
  save.addEventListener('click', () => {
    const modified: Record<string, unknown> = {};
    for (const [name, input] of inputs) {
      modified[name] = parseScalar(input.value);
    }
    handlers.onResolve(item.request_id, 'modify', {
      modified_action: modified,
      enrichment: enrichmentFrom(card),
      comment: commentFrom(card),
    });
  });
  form.appendChild(save);
  card.appendChild(form);
}

export function renderInbox(
  container: HTMLElement,
  state: InboxState,
  handlers: InboxHandlers,
): void {
  container.replaceChildren();

  if (state.connectionError) {
    const banner = el('div', 'banner banner-error', state.connectionError);
    const retry = el('button', 'btn btn-retry', 'retry');
    retry.addEventListener('click', handlers.onRetry);
    banner.appendChild(retry);
    container.appendChild(banner);
  }
  if (state.notice) {
    container.appendChild(el('div', 'banner banner-notice', state.notice));
  }

  if (!state.loaded && !state.connectionError) {
    container.appendChild(el('p', 'loading', 'loading…'));
    return;
  }
  if (state.loaded && state.items.length === 0) {
    container.appendChild(el('p', 'empty-state', 'no pending approvals'));
    return;
  }
  const list = el('div', 'cards');
  for (const item of state.items) {
    list.appendChild(workItemCard(item, handlers));
  }
  container.appendChild(list);
}

export function renderTimeline(container: HTMLElement, records: AuditRecord[]): void {
  container.replaceChildren();
  if (records.length === 0) {
    container.appendChild(el('p', 'empty-state', 'no audit records for this request'));
    return;
  }
  const list = el('ol', 'timeline');
  for (const record of records) {
    const entry = el('li', `timeline-entry event-${record.event}`);
    entry.appendChild(el('span', 'event-name', record.event));
    entry.appendChild(el('time', 'event-ts', record.ts));
    list.appendChild(entry);
  }
  container.appendChild(list);
}
