// Telemetry feed: EventSource wrapper with automatic reconnect that resumes
// from the last applied event id, plus an offline replay path for logs.

import type { ConsoleStore } from './store';
import type { TelemetryEvent } from './types';

export class TelemetryFeed {
  private source: EventSource | null = null;
  private closed = false;

  constructor(
    private store: ConsoleStore,
    private base: string = '',
    private reconnectDelayMs = 1000,
  ) {}

  connect(): void {
    this.closed = false;
    this.open();
  }

  private open(): void {
    const last = this.store.state.frame.lastEventId;
    const url = `${this.base}/telemetry${last ? `?last_event_id=${last}` : ''}`;
    this.source = new EventSource(url);
    this.source.onopen = () => this.store.setConnection('live');
    this.source.onmessage = (message: MessageEvent<string>) => {
      const event = JSON.parse(message.data) as TelemetryEvent;
      if (event.id > this.store.state.frame.lastEventId) {
        this.store.applyEvent(event);
      }
    };
    this.source.onerror = () => {
      if (this.closed) return;
      this.store.setConnection('reconnecting');
      this.source?.close();
      setTimeout(() => {
        if (!this.closed) this.open();
      }, this.reconnectDelayMs);
    };
  }

  close(): void {
    this.closed = true;
    this.source?.close();
    this.store.setConnection('idle');
  }
}

export function replayLog(store: ConsoleStore, events: TelemetryEvent[]) {
  return store.replay(events);
}
