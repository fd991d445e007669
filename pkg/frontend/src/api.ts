/** Typed client for the recommend-and-explain HTTP API.
 *
 * Every string shown in the UI comes from these payloads verbatim; the
 * client never synthesizes reason text.
 */

export type Phase = "for-only" | "for-and-against";

export interface ReasonPayload {
  text: string;
  path_type: string;
  entities: string[];
  scheme?: string;
  favored?: string | null;
}

export interface RecommendedItem {
  item: string;
  score: number;
  reason_for: ReasonPayload | null;
  reason_against: ReasonPayload | null;
}

export interface RecommendResponse {
  anchor: string;
  scheme: string;
  n: number;
  items: RecommendedItem[];
}

export interface ChoiceEvent {
  session_id: string;
  phase: Phase;
  chosen_item: string;
  timestamp?: string;
}

export interface ChoiceReceipt {
  status: string;
  session_id: string;
  phase: string;
  chosen_item: string;
  timestamp: string;
}

export interface StatsResponse {
  sessions: number;
  completed: number;
  changed: number;
  change_rate: number | "n/a";
}

export interface HealthResponse {
  status: string;
  entities: number;
  relations: number;
  triples: number;
  candidates: number;
}

export class ApiError extends Error {
  constructor(
    message: string,
    readonly status: number,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

/** 409 from the server: duplicate phase submission or phases out of order. */
export class ConflictError extends ApiError {
  constructor(message: string) {
    super(message, 409);
    this.name = "ConflictError";
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  private readonly fetchFn: FetchLike;

  constructor(
    private readonly baseUrl: string = "",
    fetchFn?: FetchLike,
  ) {
    // bind lazily so a browser's window.fetch keeps its receiver
    this.fetchFn = fetchFn ?? ((input, init) => fetch(input, init));
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let resp: Response;
    try {
      resp = await this.fetchFn(this.baseUrl + path, init);
    } catch (err) {
      throw new ApiError(`network failure: ${String(err)}`, 0);
    }
    if (!resp.ok) {
      let detail = resp.statusText;
      try {
        const body = (await resp.json()) as { detail?: unknown };
        if (typeof body.detail === "string") detail = body.detail;
      } catch {
        // non-JSON error body: keep the status text
      }
      if (resp.status === 409) throw new ConflictError(detail);
      throw new ApiError(detail, resp.status);
    }
    return (await resp.json()) as T;
  }

  private post<T>(path: string, payload: unknown): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(payload),
    });
  }

  health(): Promise<HealthResponse> {
    return this.request<HealthResponse>("/health");
  }

  async items(): Promise<string[]> {
    const body = await this.request<{ items: string[] }>("/items");
    return body.items;
  }

  recommend(anchor: string, n = 4, scheme = "s3"): Promise<RecommendResponse> {
    return this.post<RecommendResponse>("/recommend", { anchor, n, scheme });
  }

  submitChoice(event: ChoiceEvent): Promise<ChoiceReceipt> {
    return this.post<ChoiceReceipt>("/choice", event);
  }

  stats(): Promise<StatsResponse> {
    return this.request<StatsResponse>("/stats");
  }
}
