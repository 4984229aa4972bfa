// DOM wiring for the operator console: destination drop-down, live map,
// room attributes, weight editor, mission controls, warning banner.

import { ApiError, ServiceClient } from './api';
import {
  describeScanAge,
  gridToRgba,
  metricPathPolyline,
  poseTriangle,
  viewportFor,
  waypointMarkers,
  worldToCanvas,
  type Viewport,
} from './render';
import { ConsoleStore, type ConsoleState } from './store';
import { TelemetryFeed } from './telemetry';
import type { RoomInfo, Weights } from './types';

const SVG_NS = 'http://www.w3.org/2000/svg';

const WEIGHT_FIELDS: { key: keyof Weights; label: string }[] = [
  { key: 'w_m_invisible', label: 'wall: invisible material' },
  { key: 'w_m_visible', label: 'wall: visible material' },
  { key: 'w_h_high', label: 'hazard (high)' },
  { key: 'w_d_push', label: 'door: push' },
  { key: 'w_d_pull', label: 'door: pull' },
  { key: 'warning_threshold', label: 'warning threshold' },
];

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  text = '',
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [k, v] of Object.entries(attrs)) node.setAttribute(k, v);
  if (text) node.textContent = text;
  return node;
}

export class ConsoleApp {
  store = new ConsoleStore();
  client: ServiceClient;
  feed: TelemetryFeed;
  private view: Viewport | null = null;
  private renderedMapVersion = -1;

  constructor(private root: HTMLElement, base = '') {
    this.client = new ServiceClient(base);
    this.feed = new TelemetryFeed(this.store, base);
  }

  async start(): Promise<void> {
    this.buildLayout();
    const [rooms, map, weights] = await Promise.all([
      this.client.rooms(),
      this.client.map(),
      this.client.weights(),
    ]);
    this.store.setRooms(rooms);
    this.store.setMap(map);
    this.store.setWeights(weights);
    this.store.subscribe((state) => this.render(state));
    this.feed.connect();
    this.render(this.store.state);
  }

  private buildLayout(): void {
    this.root.innerHTML = `
      <header>
        <label>destination
          <select id="destination"></select>
        </label>
        <button id="plan">Generate Path</button>
        <button id="move">Move Robot</button>
        <button id="stop">Stop</button>
        <span id="connection"></span>
      </header>
      <div id="banner" hidden></div>
      <div id="route" hidden></div>
      <main>
        <aside id="room-panel"><h3>room</h3><dl id="room-attrs"></dl></aside>
        <section id="map-wrap">
          <canvas id="map-canvas"></canvas>
          <svg id="overlay"></svg>
          <div id="status"></div>
        </section>
        <aside id="weight-panel">
          <h3>planner weights</h3>
          <form id="weights-form"></form>
          <button id="save-weights">Save Weights</button>
        </aside>
      </main>
    `;
    this.root.querySelector('#plan')!.addEventListener('click', () => void this.onPlan());
    this.root.querySelector('#move')!.addEventListener('click', () => void this.onMove());
    this.root.querySelector('#stop')!.addEventListener('click', () => void this.client.stop());
    this.root
      .querySelector('#save-weights')!
      .addEventListener('click', () => void this.onSaveWeights());
    this.root
      .querySelector('#destination')!
      .addEventListener('change', () => this.render(this.store.state));
  }

  selectedRoom(): string {
    return (this.root.querySelector('#destination') as HTMLSelectElement).value;
  }

  async onPlan(): Promise<void> {
    try {
      const plan = await this.client.plan(this.selectedRoom());
      this.store.setPlan(plan);
    } catch (error) {
      this.showError(error);
    }
  }

  async onMove(): Promise<void> {
    try {
      await this.client.move();
      this.store.setMoving(true);
    } catch (error) {
      this.showError(error);
    }
  }

  async onSaveWeights(): Promise<void> {
    const current = this.store.state.weights;
    if (!current) return;
    const updated: Weights = { ...current };
    for (const field of WEIGHT_FIELDS) {
      const input = this.root.querySelector<HTMLInputElement>(`#weight-${field.key}`);
      if (input) (updated[field.key] as number) = Number(input.value);
    }
    try {
      this.store.setWeights(await this.client.putWeights(updated));
    } catch (error) {
      this.showError(error);
    }
  }

  private showError(error: unknown): void {
    const status = this.root.querySelector('#status')!;
    status.textContent =
      error instanceof ApiError ? `service: ${error.message} (${error.status})` : String(error);
  }

  render(state: ConsoleState): void {
    this.renderDestinations(state.rooms);
    this.renderRoomPanel(state);
    this.renderWeights(state.weights);
    this.renderBanner(state.banner);
    this.renderRoute(state);
    this.renderMap(state);
    const connection = this.root.querySelector('#connection')!;
    connection.textContent = state.connection;
    const status = this.root.querySelector('#status')!;
    if (state.frame.pose) {
      const frame = state.frame;
      status.textContent =
        `pose (${frame.pose!.x.toFixed(2)}, ${frame.pose!.y.toFixed(2)})` +
        ` spread ${frame.spread.toFixed(2)} m` +
        (frame.moving ? ' | moving' : '') +
        (frame.collided ? ' | collision' : '') +
        (frame.missionResult ? ` | ${frame.missionResult}` : '');
    }
  }

  private renderDestinations(rooms: RoomInfo[]): void {
    const select = this.root.querySelector('#destination') as HTMLSelectElement;
    const existing = new Set(Array.from(select.options).map((o) => o.value));
    for (const room of rooms) {
      if (!existing.has(room.id)) {
        const option = el('option', { value: room.id }, room.name);
        select.appendChild(option);
      }
    }
  }

  private renderRoomPanel(state: ConsoleState): void {
    const attrs = this.root.querySelector('#room-attrs')!;
    const room = state.rooms.find((r) => r.id === this.selectedRoom()) ?? state.rooms[0];
    if (!room) return;
    attrs.innerHTML = '';
    const rows: [string, string][] = [
      ['name', room.name],
      ['area', `${room.area_m2.toFixed(0)} m²`],
      ['walls', room.materials.join(', ')],
      ['scan', describeScanAge(room.scan_age_s)],
      ['hazard', room.hazard],
      ['weight', `${room.weight}`],
    ];
    for (const [k, v] of rows) {
      attrs.appendChild(el('dt', {}, k));
      attrs.appendChild(el('dd', { 'data-attr': k }, v));
    }
  }

  private renderWeights(weights: Weights | null): void {
    if (!weights) return;
    const form = this.root.querySelector('#weights-form')!;
    if (!form.hasChildNodes()) {
      for (const field of WEIGHT_FIELDS) {
        const label = el('label', {}, field.label);
        const input = el('input', {
          id: `weight-${field.key}`,
          type: 'number',
          step: 'any',
        });
        label.appendChild(input);
        form.appendChild(label);
      }
    }
    for (const field of WEIGHT_FIELDS) {
      const input = this.root.querySelector<HTMLInputElement>(`#weight-${field.key}`);
      if (input && document.activeElement !== input) {
        input.value = String(weights[field.key]);
      }
    }
  }

  private renderRoute(state: ConsoleState): void {
    const node = this.root.querySelector('#route') as HTMLElement;
    if (!state.plan) {
      node.hidden = true;
      return;
    }
    const names = new Map(state.rooms.map((r) => [r.id, r.name]));
    const rooms = state.plan.semantic_path.semantic_path
      .filter((_, i) => i % 2 === 0)
      .map((id) => names.get(id) ?? id);
    node.hidden = false;
    node.textContent = `route: ${rooms.join(' > ')} (weight ${state.plan.semantic_path.total_weight})`;
  }

  private renderBanner(banner: string | null): void {
    const node = this.root.querySelector('#banner') as HTMLElement;
    node.hidden = banner === null;
    node.textContent = banner ?? '';
  }

  private renderMap(state: ConsoleState): void {
    const map = state.map;
    if (!map) return;
    const canvas = this.root.querySelector('#map-canvas') as HTMLCanvasElement;
    if (!this.view) {
      this.view = viewportFor(map);
      canvas.width = this.view.width;
      canvas.height = this.view.height;
    }
    let context: CanvasRenderingContext2D | null = null;
    try {
      context = canvas.getContext('2d');
    } catch {
      context = null; // test environments without 2D canvas support
    }
    if (context && this.renderedMapVersion !== map.version) {
      const rgba = gridToRgba(map);
      const image = new ImageData(rgba, map.width, map.height);
      // draw at 1 px per cell into an offscreen, then scale up
      const off = document.createElement('canvas');
      off.width = map.width;
      off.height = map.height;
      off.getContext('2d')!.putImageData(image, 0, 0);
      context.imageSmoothingEnabled = false;
      context.drawImage(off, 0, 0, canvas.width, canvas.height);
      this.renderedMapVersion = map.version;
    }
    this.renderOverlay(state);
  }

  private renderOverlay(state: ConsoleState): void {
    const map = state.map;
    if (!map || !this.view) return;
    const svg = this.root.querySelector('#overlay') as SVGSVGElement;
    svg.setAttribute('width', String(this.view.width));
    svg.setAttribute('height', String(this.view.height));
    svg.innerHTML = '';

    if (state.plan) {
      const line = document.createElementNS(SVG_NS, 'polyline');
      line.setAttribute('class', 'metric-path');
      line.setAttribute('fill', 'none');
      line.setAttribute('points', metricPathPolyline(map, this.view, state.plan.metric_path.points));
      svg.appendChild(line);
      const markers = waypointMarkers(
        map,
        this.view,
        state.plan.semantic_path.semantic_path,
        state.plan.semantic_path.x_y_path,
      );
      for (const marker of markers) {
        const circle = document.createElementNS(SVG_NS, 'circle');
        circle.setAttribute('class', `waypoint ${marker.kind}`);
        circle.setAttribute('data-label', marker.label);
        circle.setAttribute('cx', marker.x.toFixed(1));
        circle.setAttribute('cy', marker.y.toFixed(1));
        circle.setAttribute('r', marker.kind === 'room' ? '7' : '5');
        svg.appendChild(circle);
      }
    }

    const pose = state.frame.pose;
    if (pose) {
      if (state.frame.spread > 0) {
        const spread = document.createElementNS(SVG_NS, 'circle');
        const [cx, cy] = worldToCanvas(map, this.view, pose.x, pose.y);
        spread.setAttribute('class', 'spread');
        spread.setAttribute('cx', cx.toFixed(1));
        spread.setAttribute('cy', cy.toFixed(1));
        spread.setAttribute(
          'r',
          ((state.frame.spread / map.resolution) * this.view.pxPerCell).toFixed(1),
        );
        svg.appendChild(spread);
      }
      const arrow = document.createElementNS(SVG_NS, 'polygon');
      arrow.setAttribute('class', 'pose');
      arrow.setAttribute('points', poseTriangle(map, this.view, pose));
      svg.appendChild(arrow);
    }
  }
}

export function boot(): void {
  const root = document.getElementById('app');
  if (root) {
    const app = new ConsoleApp(root, '');
    void app.start();
  }
}

if (typeof document !== 'undefined' && document.getElementById('app')) {
  boot();
}
