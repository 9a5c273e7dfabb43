import type { AttributeInfo, SessionDocument } from "./types.js";

/** Everything the panes render from. Mirrors the last server response;
 * there is no client-side conversation logic behind it. */
export interface ViewState {
  sessionId: string;
  doc: SessionDocument;
  catalog: Map<string, AttributeInfo>;
  /** Chips from the last turn when we have one, otherwise derived from the
   * document so a reload shows the same affordances. */
  chips: string[];
  banner: { code: string; message: string } | null;
  busy: boolean;
}

/** What the chat composer should offer in a given stored state. This is a
 * presentation map over the document, not engine logic: the server already
 * decided the phase, we only pick labels for it. Matches the chips the
 * engine sends with live turns, minus one-shot hints. */
export function chipsFromDocument(doc: SessionDocument, catalog: Map<string, AttributeInfo>): string[] {
  const state = doc.engine_state;
  if (state.mode === "open") return ["What else could we describe?"];
  if (state.phase === "suggestion_offered") return ["Yes", "Something else", "Skip"];
  if (state.phase === "awaiting_name" || state.phase === "awaiting_value") {
    const attr = state.phase_attribute ? catalog.get(state.phase_attribute) : undefined;
    const chips = attr?.suggestible ? ["Give me a suggestion"] : [];
    return chips.concat(["What does that mean?", "Skip"]);
  }
  return [];
}

export function freshState(
  sessionId: string,
  doc: SessionDocument,
  catalog: Map<string, AttributeInfo>,
  chips?: string[],
): ViewState {
  return {
    sessionId,
    doc,
    catalog,
    chips: chips ?? chipsFromDocument(doc, catalog),
    banner: null,
    busy: false,
  };
}

export interface PinRow {
  message_id: number;
  text: string;
}

/** Pins joined with their transcript texts, in pin order. */
export function pinRows(doc: SessionDocument): PinRow[] {
  const byId = new Map(doc.transcript.map((m) => [m.id, m.text]));
  return doc.pins.map((p) => ({ message_id: p.message_id, text: byId.get(p.message_id) ?? "" }));
}

export function displayNameOf(catalog: Map<string, AttributeInfo>, attributeId: string): string {
  return catalog.get(attributeId)?.display_name ?? attributeId;
}
