import { ApiClient, ApiError } from "./api.js";
import { chipsFromDocument, freshState, type ViewState } from "./state.js";
import type { AttributeInfo, SessionSummaryWire, TurnOutputWire } from "./types.js";
import { renderPicker, renderSession } from "./view.js";

/** The single-page client. All state lives in `view`; every pane rerenders
 * from the server's answer, never optimistically. One mutating request is
 * in flight at a time; the composer and buttons are disabled meanwhile. */
export class App {
  private api: ApiClient;
  private catalog: Map<string, AttributeInfo> = new Map();
  private view: ViewState | null = null;
  private sessions: SessionSummaryWire[] = [];
  private pickerBanner: { code: string; message: string } | null = null;
  private busy = false;

  constructor(private root: HTMLElement, baseUrl: string = "") {
    this.api = new ApiClient(baseUrl);
    this.root.addEventListener("click", (event) => this.onClick(event));
    this.root.addEventListener("submit", (event) => {
      event.preventDefault();
      void this.sendFromComposer();
    });
  }

  async boot(): Promise<void> {
    try {
      const [attrs, sessions] = await Promise.all([
        this.api.listAttributes(),
        this.api.listSessions(),
      ]);
      this.catalog = new Map(attrs.attributes.map((a) => [a.id, a]));
      this.sessions = sessions.sessions;
      this.pickerBanner = null;
    } catch (err) {
      this.pickerBanner = bannerFor(err);
    }
    this.render();
  }

  async openSession(sessionId: string): Promise<void> {
    await this.guard(async () => {
      const doc = await this.api.getSession(sessionId);
      this.view = freshState(sessionId, doc, this.catalog);
    });
  }

  async newCharacter(): Promise<void> {
    await this.guard(async () => {
      const created = await this.api.createSession();
      const doc = await this.api.getSession(created.session_id);
      this.view = freshState(created.session_id, doc, this.catalog, created.opening.quick_replies);
    });
  }

  async sendMessage(text: string): Promise<void> {
    await this.refreshAfter((id) => this.api.sendMessage(id, text));
  }

  async chooseCandidate(index: number): Promise<void> {
    await this.refreshAfter((id) => this.api.chooseCandidate(id, index));
  }

  async deleteAttribute(attributeId: string): Promise<void> {
    await this.refreshAfter(async (id) => {
      await this.api.deleteAttribute(id, attributeId);
      return null;
    });
  }

  async pin(messageId: number): Promise<void> {
    await this.refreshAfter(async (id) => {
      await this.api.pin(id, messageId);
      return null;
    });
  }

  async unpin(messageId: number): Promise<void> {
    await this.refreshAfter(async (id) => {
      await this.api.unpin(id, messageId);
      return null;
    });
  }

  /** Run one mutating call, then rebuild the whole view from a fresh GET of
   * the session document. Turn responses only contribute their quick
   * replies (they may carry one-shot chips the document cannot know) and
   * their in-conversation error, if any. */
  private async refreshAfter(
    call: (sessionId: string) => Promise<{ turn: TurnOutputWire } | null>,
  ): Promise<void> {
    const view = this.view;
    if (!view) return;
    await this.guard(async () => {
      const result = await call(view.sessionId);
      const doc = await this.api.getSession(view.sessionId);
      const turn = result?.turn ?? null;
      this.view = freshState(
        view.sessionId,
        doc,
        this.catalog,
        turn ? turn.quick_replies : chipsFromDocument(doc, this.catalog),
      );
      if (turn?.error) {
        this.view.banner = { code: turn.error.error_code, message: turn.error.message };
      }
    });
  }

  private async guard(work: () => Promise<void>): Promise<void> {
    if (this.busy) return;
    this.busy = true;
    this.render();
    try {
      await work();
      if (this.view) this.view.banner = this.view.banner ?? null;
    } catch (err) {
      // failed call: keep the previous document, report the code
      const banner = bannerFor(err);
      if (this.view) this.view.banner = banner;
      else this.pickerBanner = banner;
    } finally {
      this.busy = false;
      this.render();
    }
  }

  private async sendFromComposer(): Promise<void> {
    const input = this.root.querySelector<HTMLInputElement>("#composer-input");
    if (!input) return;
    const text = input.value.trim();
    if (!text) return;
    await this.sendMessage(text);
  }

  private onClick(event: Event): void {
    const target = (event.target as HTMLElement).closest<HTMLElement>("[data-action]");
    if (!target) return;
    const action = target.dataset.action;
    if (action === "send") {
      void this.sendFromComposer();
    } else if (action === "chip") {
      void this.sendMessage(target.dataset.text ?? "");
    } else if (action === "candidate") {
      void this.chooseCandidate(Number(target.dataset.index));
    } else if (action === "delete-attr") {
      void this.deleteAttribute(target.dataset.attr ?? "");
    } else if (action === "pin") {
      void this.pin(Number(target.dataset.id));
    } else if (action === "unpin") {
      void this.unpin(Number(target.dataset.id));
    } else if (action === "new-character") {
      void this.newCharacter();
    } else if (action === "open-session") {
      void this.openSession(target.dataset.id ?? "");
    }
  }

  private render(): void {
    if (this.view) {
      this.view.busy = this.busy;
      renderSession(this.root, this.view);
    } else {
      renderPicker(this.root, {
        sessions: this.sessions,
        banner: this.pickerBanner,
        busy: this.busy,
      });
    }
  }
}

function bannerFor(err: unknown): { code: string; message: string } {
  if (err instanceof ApiError) return { code: err.code, message: err.message };
  return { code: "client_error", message: String(err) };
}
