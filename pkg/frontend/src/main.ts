// Bootstrap: user picker, inbox wiring, audit drawer. Configuration is the
// service base URL (?service=... or the input field); identity is asserted
// by picking a user id, matching the service's trust model.

import { ApiError, HitlClient } from './api.js';
import { InboxController } from './inbox.js';
import { renderInbox, renderTimeline } from './render.js';

const REFRESH_MS = 3000;

function query(name: string): string | null {
  return new URLSearchParams(window.location.search).get(name);
}

function mustGet<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

async function openInbox(serviceUrl: string, userId: string): Promise<void> {
  const inboxRoot = mustGet<HTMLElement>('inbox');
  const auditRoot = mustGet<HTMLElement>('audit');
  const pickerError = mustGet<HTMLElement>('picker-error');
  const client = new HitlClient(serviceUrl);

  try {
    await client.listPending(userId); // validates the user id (404 -> unknown)
  } catch (error) {
    pickerError.textContent =
      error instanceof ApiError && error.status === 404
        ? `unknown user '${userId}'`
        : 'service unreachable';
    return;
  }
  pickerError.textContent = '';
  mustGet<HTMLElement>('picker').hidden = true;
  mustGet<HTMLElement>('session').hidden = false;
  mustGet<HTMLElement>('session-user').textContent = userId;

  const controller = new InboxController(client, userId, {
    refreshMs: REFRESH_MS,
    onChange: (state) =>
      renderInbox(inboxRoot, state, {
        onResolve: (requestId, outcome, extras) =>
          void controller.resolve(requestId, outcome, extras),
        onShowAudit: (requestId) =>
          void client.audit(requestId).then((records) => {
            auditRoot.hidden = false;
            renderTimeline(auditRoot, records);
          }),
        onRetry: () => void controller.refresh(),
      }),
  });
  controller.start();
}

function main(): void {
  const serviceInput = mustGet<HTMLInputElement>('service-url');
  const userInput = mustGet<HTMLInputElement>('user-id');
  serviceInput.value = query('service') ?? 'http://127.0.0.1:8080';
  const presetUser = query('user');
  if (presetUser) userInput.value = presetUser;

  mustGet<HTMLButtonElement>('open-inbox').addEventListener('click', () => {
    const userId = userInput.value.trim();
    if (userId) void openInbox(serviceInput.value.trim(), userId);
  });
  if (presetUser) void openInbox(serviceInput.value.trim(), presetUser);
}

main();
