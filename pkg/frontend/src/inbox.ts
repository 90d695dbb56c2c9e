// Inbox view-model: items mirror the server's list_pending order — the
// client never invents or reorders state. Mutations go through respond();
// a 409 from a concurrent resolver becomes a notice plus a refresh.

import { ApiError, ConflictError, HitlClient, Outcome, WorkItem } from './api.js';

export interface ResolveExtras {
  modified_action?: Record<string, unknown>;
  enrichment?: Record<string, unknown>;
  comment?: string;
}

export interface InboxState {
  userId: string;
  items: WorkItem[];
  /** Transient outcome of the last action (success toast or conflict notice). */
  notice: string | null;
  /** Set while the service is unreachable; cleared by a successful refresh. */
  connectionError: string | null;
  loaded: boolean;
}

export class InboxController {
  readonly state: InboxState;
  private timer: ReturnType<typeof setInterval> | null = null;
  private readonly onChange: (state: InboxState) => void;

  constructor(
    private readonly client: HitlClient,
    userId: string,
    options: { refreshMs?: number; onChange?: (state: InboxState) => void } = {},
  ) {
    this.state = {
      userId,
      items: [],
      notice: null,
      connectionError: null,
      loaded: false,
    };
    this.refreshMs = options.refreshMs ?? 3000;
    this.onChange = options.onChange ?? (() => undefined);
  }

  readonly refreshMs: number;

  start(): void {
    if (this.timer !== null) return;
    void this.refresh();
    this.timer = setInterval(() => void this.refresh(), this.refreshMs);
  }

  stop(): void {
    if (this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
    }
  }

  async refresh(): Promise<void> {
    try {
      const items = await this.client.listPending(this.state.userId);
      this.state.items = items;
      this.state.connectionError = null;
      this.state.loaded = true;
    } catch (error) {
      this.state.connectionError =
        error instanceof ApiError
          ? `service error: ${error.message}`
          : 'service unreachable';
    }
    this.onChange(this.state);
  }

  /**
   * Resolve one item. On success the card is removed optimistically; the
   * next refresh reconciles with the server. A conflict keeps the UI
   * consistent by refreshing immediately.
   */
  async resolve(requestId: string, outcome: Outcome, extras: ResolveExtras = {}): Promise<void> {
    try {
      await this.client.respond({
        request_id: requestId,
        user_id: this.state.userId,
        outcome,
        ...extras,
      });
      this.state.items = this.state.items.filter((item) => item.request_id !== requestId);
      this.state.notice =
        outcome === 'defer' ? 'deferred and re-queued' : `${outcome} recorded`;
      this.onChange(this.state);
      await this.refresh();
    } catch (error) {
      if (error instanceof ConflictError) {
        this.state.notice = 'already resolved by another participant';
        this.onChange(this.state);
        await this.refresh();
        return;
      }
      if (error instanceof ApiError) {
        // 403/404 etc: surface verbatim; the refresh drops the stale card.
        this.state.notice = `${error.code}: ${error.message}`;
        this.onChange(this.state);
        await this.refresh();
        return;
      }
      this.state.connectionError = 'service unreachable';
      this.onChange(this.state);
    }
  }

  clearNotice(): void {
    this.state.notice = null;
    this.onChange(this.state);
  }
}
