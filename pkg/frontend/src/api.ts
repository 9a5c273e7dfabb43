import type {
  ApiErrorBody,
  AttributeInfo,
  SessionDocument,
  SessionSummaryWire,
  TurnOutputWire,
} from "./types.js";

/** A failed API call. `code` is the server's error_code, or a
 * client-assigned one ("network_error", "bad_response") when the failure
 * never reached the server or came back unreadable. */
export class ApiError extends Error {
  code: string;
  status: number | null;

  constructor(code: string, message: string, status: number | null = null) {
    super(message);
    this.code = code;
    this.status = status;
  }
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  let response: Response;
  try {
    response = await fetch(url, init);
  } catch (err) {
    throw new ApiError("network_error", String(err));
  }
  let body: unknown = null;
  try {
    body = await response.json();
  } catch {
    if (response.ok) throw new ApiError("bad_response", "response was not JSON", response.status);
  }
  if (!response.ok) {
    const e = (body ?? {}) as Partial<ApiErrorBody>;
    throw new ApiError(e.error_code ?? "http_error", e.message ?? `HTTP ${response.status}`, response.status);
  }
  return body as T;
}

function post(body?: unknown): RequestInit {
  return {
    method: "POST",
    headers: { "content-type": "application/json" },
    body: body === undefined ? "{}" : JSON.stringify(body),
  };
}

export class ApiClient {
  constructor(private baseUrl: string = "") {}

  listAttributes(): Promise<{ attributes: AttributeInfo[] }> {
    return request(`${this.baseUrl}/api/attributes`);
  }

  listSessions(): Promise<{ sessions: SessionSummaryWire[] }> {
    return request(`${this.baseUrl}/api/sessions`);
  }

  createSession(seed?: number): Promise<{ session_id: string; opening: TurnOutputWire }> {
    return request(`${this.baseUrl}/api/sessions`, post(seed === undefined ? {} : { seed }));
  }

  getSession(id: string): Promise<SessionDocument> {
    return request(`${this.baseUrl}/api/sessions/${id}`);
  }

  sendMessage(id: string, text: string): Promise<{ turn: TurnOutputWire }> {
    return request(`${this.baseUrl}/api/sessions/${id}/messages`, post({ text }));
  }

  chooseCandidate(id: string, index: number): Promise<{ turn: TurnOutputWire }> {
    return request(`${this.baseUrl}/api/sessions/${id}/candidates/${index}`, post());
  }

  deleteAttribute(id: string, attributeId: string): Promise<unknown> {
    return request(`${this.baseUrl}/api/sessions/${id}/attributes/${attributeId}`, { method: "DELETE" });
  }

  pin(id: string, messageId: number): Promise<unknown> {
    return request(`${this.baseUrl}/api/sessions/${id}/pins`, post({ message_id: messageId }));
  }

  unpin(id: string, messageId: number): Promise<unknown> {
    return request(`${this.baseUrl}/api/sessions/${id}/pins/${messageId}`, { method: "DELETE" });
  }
}
