// Central console state. Everything the UI shows derives from service
// responses and telemetry events flowing through this store; rendering is a
// pure function of a frame, which is what makes log replay reproducible.

import type {
  MapSnapshot,
  PlanResponse,
  PoseDto,
  RoomInfo,
  TelemetryEvent,
  Weights,
} from './types';

export interface Frame {
  pose: PoseDto | null;
  spread: number;
  waypointIndex: number;
  collided: boolean;
  arrived: boolean;
  mapVersion: number;
  lastEventId: number;
  moving: boolean;
  missionResult: string | null;
}

export interface ConsoleState {
  rooms: RoomInfo[];
  map: MapSnapshot | null;
  weights: Weights | null;
  plan: PlanResponse | null;
  banner: string | null;
  connection: 'idle' | 'live' | 'reconnecting';
  frame: Frame;
}

export const initialFrame = (): Frame => ({
  pose: null,
  spread: 0,
  waypointIndex: 0,
  collided: false,
  arrived: false,
  mapVersion: 0,
  lastEventId: 0,
  moving: false,
  missionResult: null,
});

type Listener = (state: ConsoleState) => void;

export class ConsoleStore {
  state: ConsoleState = {
    rooms: [],
    map: null,
    weights: null,
    plan: null,
    banner: null,
    connection: 'idle',
    frame: initialFrame(),
  };

  private listeners: Listener[] = [];

  subscribe(listener: Listener): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  private emit(): void {
    for (const listener of this.listeners) listener(this.state);
  }

  setRooms(rooms: RoomInfo[]): void {
    this.state = { ...this.state, rooms };
    this.emit();
  }

  setMap(map: MapSnapshot): void {
    this.state = { ...this.state, map };
    this.emit();
  }

  setWeights(weights: Weights): void {
    this.state = { ...this.state, weights };
    this.emit();
  }

  setConnection(connection: ConsoleState['connection']): void {
    this.state = { ...this.state, connection };
    this.emit();
  }

  setPlan(plan: PlanResponse): void {
    const warnings = plan.semantic_path.warnings;
    const banner = warnings.length
      ? warnings
          .map((w) =>
            w.reason === 'bypassed'
              ? `hazard in ${w.room_id} (weight ${w.weight}) bypassed by this route`
              : `route passes ${w.room_id} with weight ${w.weight}`,
          )
          .join('; ')
      : null;
    this.state = { ...this.state, plan, banner };
    this.emit();
  }

  setMoving(moving: boolean): void {
    this.state = { ...this.state, frame: { ...this.state.frame, moving } };
    this.emit();
  }

  applyEvent(event: TelemetryEvent): void {
    const frame = { ...this.state.frame, lastEventId: event.id };
    if (event.type === 'tick') {
      frame.pose = event.pose_est;
      frame.spread = event.spread;
      frame.waypointIndex = event.waypoint_index;
      frame.collided = event.collided;
      frame.arrived = event.arrived;
      frame.mapVersion = event.map_version;
      frame.moving = !event.arrived;
    } else {
      frame.moving = false;
      frame.missionResult = event.arrived
        ? `arrived at ${event.goal ?? '?'}`
        : `mission to ${event.goal ?? '?'} ended without arrival`;
    }
    this.state = { ...this.state, frame };
    this.emit();
  }

  /** Feed a telemetry log through the store, collecting the frame after each
   *  event. Replaying the same log always yields the same frame sequence. */
  replay(events: TelemetryEvent[]): Frame[] {
    const frames: Frame[] = [];
    this.state = { ...this.state, frame: initialFrame() };
    for (const event of events) {
      this.applyEvent(event);
      frames.push({ ...this.state.frame });
    }
    return frames;
  }
}
