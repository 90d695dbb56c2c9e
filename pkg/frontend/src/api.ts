// Typed client for the HITL control-plane REST API. Only documented
// endpoints are used: pending, respond, get-decision, audit.

export type Urgency = 'realtime' | 'normal' | 'low';
export type Outcome = 'approve' | 'reject' | 'modify' | 'defer';

export interface ProposedAction {
  name: string;
  fields: Record<string, unknown>;
}

export interface WorkItem {
  request_id: string;
  agent_id: string;
  proposed_action: ProposedAction;
  facts: Record<string, unknown>;
  reason: string | null;
  defer_count: number;
  urgency: Urgency;
  created_at: string;
}

export interface Resolution {
  outcome: Outcome;
  decided_by: 'automated' | 'human';
  decided_at: string;
  user_id: string | null;
  modified_action: Record<string, unknown> | null;
  enrichment: Record<string, unknown> | null;
  comment: string | null;
}

export interface Decision {
  request_id: string;
  status: 'received' | 'auto_resolved' | 'awaiting_human' | 'resolved' | 'expired';
  disposition_reason: string | null;
  history: [string, string][];
  resolution?: Resolution;
  decided_by?: string;
  retry_after_seconds?: number;
}

export interface AuditRecord {
  seq: number;
  request_id: string;
  event: string;
  payload: Record<string, unknown>;
  ts: string;
}

export interface RespondBody {
  request_id: string;
  user_id: string;
  outcome: Outcome;
  modified_action?: Record<string, unknown>;
  enrichment?: Record<string, unknown>;
  comment?: string;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    detail: string,
  ) {
    super(detail);
  }
}

/** Another participant resolved the item first (HTTP 409). */
export class ConflictError extends ApiError {
  constructor(detail: string) {
    super(409, 'already_resolved', detail);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

async function raiseForStatus(response: Response): Promise<void> {
  if (response.ok) return;
  let code = `http_${response.status}`;
  let detail = response.statusText;
  try {
    const body = await response.json();
    code = body.error ?? code;
    detail = body.detail ?? JSON.stringify(body);
  } catch {
    // non-JSON error body; keep the status text
  }
  if (response.status === 409) throw new ConflictError(detail);
  throw new ApiError(response.status, code, detail);
}

export class HitlClient {
  constructor(
    readonly baseUrl: string,
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private url(path: string, params?: Record<string, string>): string {
    const query = params ? `?${new URLSearchParams(params)}` : '';
    return `${this.baseUrl.replace(/\/$/, '')}${path}${query}`;
  }

  async listPending(userId: string): Promise<WorkItem[]> {
    const response = await this.fetchFn(this.url('/api/hitl/pending', { user_id: userId }));
    await raiseForStatus(response);
    const body = await response.json();
    return body.items as WorkItem[];
  }

  async respond(body: RespondBody): Promise<Decision> {
    const response = await this.fetchFn(this.url('/api/hitl/respond'), {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify(body),
    });
    await raiseForStatus(response);
    return (await response.json()) as Decision;
  }

  async getDecision(requestId: string): Promise<Decision> {
    const response = await this.fetchFn(
      this.url('/api/hitl/get-decision', { request_id: requestId }),
    );
    await raiseForStatus(response);
    return (await response.json()) as Decision;
  }

  async audit(requestId: string): Promise<AuditRecord[]> {
    const response = await this.fetchFn(this.url('/api/hitl/audit', { request_id: requestId }));
    await raiseForStatus(response);
    const body = await response.json();
    return body.records as AuditRecord[];
  }
}
