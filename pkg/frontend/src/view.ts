import type { SessionSummaryWire } from "./types.js";
import { displayNameOf, pinRows, type ViewState } from "./state.js";

// All rendering goes through createElement/textContent so message text is
// never interpreted as markup. Buttons carry data-action attributes; the
// app wires one delegated click listener.

function el(tag: string, className?: string, text?: string): HTMLElement {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function button(className: string, action: string, label: string, data: Record<string, string> = {}): HTMLButtonElement {
  const b = el("button", className, label) as HTMLButtonElement;
  b.type = "button";
  b.dataset.action = action;
  for (const [k, v] of Object.entries(data)) b.dataset[k] = v;
  return b;
}

export function renderSession(root: HTMLElement, state: ViewState): void {
  root.textContent = "";
  if (state.banner) {
    const banner = el("div", "banner error");
    banner.append(
      el("span", "banner-code", state.banner.code),
      el("span", "banner-message", state.banner.message),
    );
    root.append(banner);
  }

  const panes = el("main", "panes");
  panes.append(chatPane(state), characterPane(state), pinboardPane(state));
  root.append(panes);

  if (state.busy) {
    for (const b of root.querySelectorAll<HTMLButtonElement | HTMLInputElement>("button, input")) {
      b.disabled = true;
    }
  }
}

function chatPane(state: ViewState): HTMLElement {
  const pane = el("section", "pane chat-pane");
  pane.append(el("h2", undefined, "Chat"));

  const pinned = new Set(state.doc.pins.map((p) => p.message_id));
  const transcript = el("div", "transcript");
  for (const message of state.doc.transcript) {
    const bubble = el("div", `bubble ${message.author}`);
    bubble.dataset.id = String(message.id);
    bubble.append(el("span", "bubble-text", message.text));
    if (message.author === "bot") {
      const isPinned = pinned.has(message.id);
      bubble.append(
        button(
          isPinned ? "pin-btn pinned" : "pin-btn",
          isPinned ? "unpin" : "pin",
          isPinned ? "★" : "☆",
          { id: String(message.id) },
        ),
      );
    }
    transcript.append(bubble);
  }
  pane.append(transcript);

  const candidates = state.doc.engine_state.pending_candidates;
  if (candidates.length > 0) {
    const picker = el("div", "candidate-picker");
    picker.append(el("p", "picker-label", "Pick my reply:"));
    for (const c of candidates) {
      picker.append(button("candidate", "candidate", c.text, { index: String(c.index) }));
    }
    pane.append(picker);
  }

  if (state.chips.length > 0) {
    const chips = el("div", "chips");
    for (const chip of state.chips) {
      chips.append(button("chip", "chip", chip, { text: chip }));
    }
    pane.append(chips);
  }

  const composer = el("form", "composer") as HTMLFormElement;
  const input = el("input") as HTMLInputElement;
  input.id = "composer-input";
  input.autocomplete = "off";
  input.placeholder = "Say something...";
  const send = button("send-btn", "send", "Send");
  send.id = "composer-send";
  composer.append(input, send);
  pane.append(composer);
  return pane;
}

function characterPane(state: ViewState): HTMLElement {
  const pane = el("section", "pane character-pane");
  pane.append(el("h2", undefined, "Character"));
  const list = el("ul", "attr-list");
  for (const held of state.doc.character.attributes) {
    const row = el("li", "attr-row");
    row.dataset.attr = held.attribute;
    row.append(
      el("span", "attr-name", displayNameOf(state.catalog, held.attribute)),
      el("span", "attr-value", held.value),
      button("attr-delete", "delete-attr", "×", { attr: held.attribute }),
    );
    list.append(row);
  }
  pane.append(list);
  pane.append(
    el(
      "p",
      "attr-count",
      `${state.doc.character.attributes.length} of ${state.catalog.size} defined`,
    ),
  );
  return pane;
}

function pinboardPane(state: ViewState): HTMLElement {
  const pane = el("section", "pane pinboard-pane");
  pane.append(el("h2", undefined, "Pinboard"));
  const list = el("ul", "pin-list");
  for (const pin of pinRows(state.doc)) {
    const entry = el("li", "pin-entry");
    entry.dataset.id = String(pin.message_id);
    entry.append(
      el("span", "pin-text", pin.text),
      button("unpin-btn", "unpin", "×", { id: String(pin.message_id) }),
    );
    list.append(entry);
  }
  pane.append(list);
  return pane;
}

export interface PickerView {
  sessions: SessionSummaryWire[];
  banner: { code: string; message: string } | null;
  busy: boolean;
}

export function renderPicker(root: HTMLElement, view: PickerView): void {
  root.textContent = "";
  if (view.banner) {
    const banner = el("div", "banner error");
    banner.append(
      el("span", "banner-code", view.banner.code),
      el("span", "banner-message", view.banner.message),
    );
    root.append(banner);
  }
  const box = el("section", "session-picker");
  box.append(el("h1", undefined, "charshape"));
  box.append(button("new-character", "new-character", "New character"));
  const list = el("ul", "session-list");
  for (const s of view.sessions) {
    const row = el("li", "session-row");
    row.append(
      button("open-session", "open-session", `${s.name} (${s.message_count} lines)`, {
        id: s.session_id,
      }),
      el("span", "session-date", s.created_at),
    );
    list.append(row);
  }
  box.append(list);
  root.append(box);
  if (view.busy) {
    for (const b of root.querySelectorAll<HTMLButtonElement>("button")) b.disabled = true;
  }
}
