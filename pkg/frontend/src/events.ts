/**
 * Server-sent-event subscription with resume.
 *
 * Uses fetch streaming rather than EventSource so it runs in browsers and
 * Node alike and so reconnects can pass the last seen event id as
 * `?since=`.
 */

import { StreamEvent } from "./types";

export interface EventStreamOptions {
  onEvent: (event: StreamEvent) => void;
  onError?: (error: unknown) => void;
  signal?: AbortSignal;
  fetchImpl?: typeof fetch;
}

export class EventStream {
  lastId = 0;

  constructor(
    private baseUrl: string,
    private projectId: string,
    private options: EventStreamOptions,
  ) {}

  /** Consume the stream until aborted; resumes from this.lastId. */
  async run(): Promise<void> {
    const fetchImpl = this.options.fetchImpl ?? fetch;
    const url = `${this.baseUrl}/projects/${this.projectId}/events?since=${this.lastId}`;
    const response = await fetchImpl(url, { signal: this.options.signal });
    if (!response.ok || !response.body) {
      throw new Error(`event stream failed: ${response.status}`);
    }
    const reader = response.body.getReader();
    const decoder = new TextDecoder();
    let buffer = "";
    for (;;) {
      const { value, done } = await reader.read();
      if (done) return;
      buffer += decoder.decode(value, { stream: true });
      let index;
      while ((index = buffer.indexOf("\n\n")) >= 0) {
        const frame = buffer.slice(0, index);
        buffer = buffer.slice(index + 2);
        this.handleFrame(frame);
      }
    }
  }

  private handleFrame(frame: string): void {
    let data: string | null = null;
    for (const line of frame.split("\n")) {
      if (line.startsWith("data: ")) data = line.slice(6);
    }
    if (data === null) return; // keep-alive comment
    try {
      const event = JSON.parse(data) as StreamEvent;
      if (event.id > this.lastId) this.lastId = event.id;
      this.options.onEvent(event);
    } catch (err) {
      this.options.onError?.(err);
    }
  }
}

/** Collect events until a predicate matches (test/scripting helper). */
export async function collectEvents(
  baseUrl: string,
  projectId: string,
  since: number,
  until: (events: StreamEvent[]) => boolean,
  timeoutMs = 10_000,
): Promise<StreamEvent[]> {
  const events: StreamEvent[] = [];
  const controller = new AbortController();
  const stream = new EventStream(baseUrl, projectId, {
    onEvent: (event) => {
      events.push(event);
      if (until(events)) controller.abort();
    },
    signal: controller.signal,
  });
  const timer = setTimeout(() => controller.abort(), timeoutMs);
  stream.lastId = since;
  try {
    await stream.run();
  } catch {
    // aborting the fetch is the normal exit path
  } finally {
    clearTimeout(timer);
  }
  return events;
}
