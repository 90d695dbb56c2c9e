// Inbox controller behavior against a scripted fetch; no real service.

import { describe, expect, it, vi } from 'vitest';

import { HitlClient, WorkItem } from '../src/api';
import { InboxController } from '../src/inbox';

function item(requestId: string, urgency: WorkItem['urgency'] = 'normal'): WorkItem {
  return {
    request_id: requestId,
    agent_id: 'agent-1',
    proposed_action: { name: 'wire_transfer', fields: { amount: 50000 } },
    facts: { amount: 50000 },
    reason: 'rule:0',
    defer_count: 0,
    urgency,
    created_at: '2026-08-10T12:00:00.000+00:00',
  };
}

type Script = Record<string, Array<{ status: number; body: unknown }>>;

function scriptedClient(script: Script): HitlClient {
  const fetchFn = vi.fn(async (input: string, init?: RequestInit) => {
    const url = new URL(input);
    const key = `${init?.method ?? 'GET'} ${url.pathname}`;
    const queue = script[key];
    if (!queue || queue.length === 0) throw new Error(`no scripted response for ${key}`);
    const next = queue.length > 1 ? queue.shift()! : queue[0];
    return new Response(JSON.stringify(next.body), { status: next.status });
  });
  return new HitlClient('http://service.test', fetchFn);
}

describe('InboxController.refresh', () => {
  it('mirrors server order and marks loaded', async () => {
    const client = scriptedClient({
      'GET /api/hitl/pending': [
        { status: 200, body: { user_id: 'bob', items: [item('r2', 'realtime'), item('r1', 'low')] } },
      ],
    });
    const controller = new InboxController(client, 'bob');
    await controller.refresh();
    expect(controller.state.loaded).toBe(true);
    expect(controller.state.items.map((i) => i.request_id)).toEqual(['r2', 'r1']);
    expect(controller.state.connectionError).toBeNull();
  });

  it('drops items the server no longer lists', async () => {
    const client = scriptedClient({
      'GET /api/hitl/pending': [
        { status: 200, body: { user_id: 'bob', items: [item('r1')] } },
        { status: 200, body: { user_id: 'bob', items: [] } },
      ],
    });
    const controller = new InboxController(client, 'bob');
    await controller.refresh();
    expect(controller.state.items).toHaveLength(1);
    await controller.refresh();
    expect(controller.state.items).toHaveLength(0);
  });

  it('flags connection errors and recovers on the next success', async () => {
    let failing = true;
    const fetchFn = vi.fn(async () => {
      if (failing) throw new TypeError('fetch failed');
      return new Response(JSON.stringify({ user_id: 'bob', items: [] }), { status: 200 });
    });
    const controller = new InboxController(new HitlClient('http://x.test', fetchFn), 'bob');
    await controller.refresh();
    expect(controller.state.connectionError).toBe('service unreachable');
    failing = false;
    await controller.refresh();
    expect(controller.state.connectionError).toBeNull();
  });

  it('refreshes on the configured interval', async () => {
    vi.useFakeTimers();
    try {
      const calls: number[] = [];
      const fetchFn = vi.fn(async () => {
        calls.push(Date.now());
        return new Response(JSON.stringify({ user_id: 'bob', items: [] }), { status: 200 });
      });
      const controller = new InboxController(new HitlClient('http://x.test', fetchFn), 'bob', {
        refreshMs: 1000,
      });
      controller.start();
      await vi.advanceTimersByTimeAsync(3100);
      controller.stop();
      expect(fetchFn.mock.calls.length).toBeGreaterThanOrEqual(4); // immediate + 3 ticks
      await vi.advanceTimersByTimeAsync(5000);
      expect(fetchFn.mock.calls.length).toBeLessThanOrEqual(5); // stopped
    } finally {
      vi.useRealTimers();
    }
  });
});

describe('InboxController.resolve', () => {
  it('removes the card optimistically on success', async () => {
    const client = scriptedClient({
      'GET /api/hitl/pending': [
        { status: 200, body: { user_id: 'bob', items: [item('r1')] } },
        { status: 200, body: { user_id: 'bob', items: [] } },
      ],
      'POST /api/hitl/respond': [
        { status: 200, body: { request_id: 'r1', status: 'resolved' } },
      ],
    });
    const controller = new InboxController(client, 'bob');
    await controller.refresh();
    await controller.resolve('r1', 'approve');
    expect(controller.state.items).toHaveLength(0);
    expect(controller.state.notice).toBe('approve recorded');
  });

  it('shows the conflict notice on 409 and converges via refresh', async () => {
    const client = scriptedClient({
      'GET /api/hitl/pending': [
        { status: 200, body: { user_id: 'bob', items: [item('r1')] } },
        { status: 200, body: { user_id: 'bob', items: [] } },
      ],
      'POST /api/hitl/respond': [
        {
          status: 409,
          body: { error: 'already_resolved', detail: 'resolved', status: 'resolved' },
        },
      ],
    });
    const controller = new InboxController(client, 'bob');
    await controller.refresh();
    await controller.resolve('r1', 'reject');
    expect(controller.state.notice).toBe('already resolved by another participant');
    expect(controller.state.items).toHaveLength(0);
    expect(controller.state.connectionError).toBeNull();
  });

  it('surfaces 403 verbatim and refreshes the stale card away', async () => {
    const client = scriptedClient({
      'GET /api/hitl/pending': [
        { status: 200, body: { user_id: 'mallory', items: [item('r1')] } },
        { status: 200, body: { user_id: 'mallory', items: [] } },
      ],
      'POST /api/hitl/respond': [
        { status: 403, body: { error: 'not_a_participant', detail: 'not allowed' } },
      ],
    });
    const controller = new InboxController(client, 'mallory');
    await controller.refresh();
    await controller.resolve('r1', 'approve');
    expect(controller.state.notice).toBe('not_a_participant: not allowed');
    expect(controller.state.items).toHaveLength(0);
  });

  it('passes modify and enrichment payloads through unchanged', async () => {
    const bodies: unknown[] = [];
    const fetchFn = vi.fn(async (input: string, init?: RequestInit) => {
      if (init?.method === 'POST') {
        bodies.push(JSON.parse(init.body as string));
        return new Response(JSON.stringify({ request_id: 'r1', status: 'resolved' }), {
          status: 200,
        });
      }
      return new Response(JSON.stringify({ user_id: 'bob', items: [] }), { status: 200 });
    });
    const controller = new InboxController(new HitlClient('http://x.test', fetchFn), 'bob');
    await controller.resolve('r1', 'modify', {
      modified_action: { amount: 9000 },
      enrichment: { checked: true },
      comment: 'trimmed',
    });
    expect(bodies[0]).toEqual({
      request_id: 'r1',
      user_id: 'bob',
      outcome: 'modify',
      modified_action: { amount: 9000 },
      enrichment: { checked: true },
      comment: 'trimmed',
    });
  });
});
