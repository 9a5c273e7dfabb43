// Wire shapes, mirroring the server's JSON exactly. The client never
// invents state: everything here comes off the API.

export interface AttributeInfo {
  id: string;
  display_name: string;
  category: string;
  prompt: string;
  suggestible: boolean;
}

export interface ChatMessageWire {
  id: number;
  author: "user" | "bot";
  text: string;
  mode: string;
  kind: string;
}

export interface CandidateWire {
  index: number;
  text: string;
}

export interface TurnOutputWire {
  bot_messages: ChatMessageWire[];
  quick_replies: string[];
  candidates: CandidateWire[] | null;
  character_delta: Record<string, unknown> | null;
  pin_delta: Record<string, unknown> | null;
  error: { error_code: string; message: string } | null;
}

export interface HeldAttributeWire {
  attribute: string;
  value: string;
  source: string;
}

export interface PinWire {
  message_id: number;
  pinned_at: number;
}

export interface SessionDocument {
  schema_version: string;
  session_id: string;
  seed: number;
  created_at: string;
  engine_state: {
    mode: string;
    phase: string;
    phase_attribute: string | null;
    pending_suggestion: string | null;
    pending_candidates: CandidateWire[];
    guided_defined_ids: string[];
    switch_hint_shown: boolean;
    suggestion_streak: number;
    last_skipped: string | null;
    turn_count: number;
    rng_state: number;
  };
  character: {
    attributes: HeldAttributeWire[];
    rejected_values: Record<string, string[]>;
  };
  transcript: ChatMessageWire[];
  pins: PinWire[];
}

export interface SessionSummaryWire {
  session_id: string;
  name: string;
  created_at: string;
  message_count: number;
}

export interface ApiErrorBody {
  error_code: string;
  message: string;
}
