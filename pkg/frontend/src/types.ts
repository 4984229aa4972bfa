// Wire types of the operator service. Field names match the JSON payloads.

export interface RoomInfo {
  id: string;
  name: string;
  center: [number, number];
  area_m2: number;
  materials: string[];
  scan_age_s: number | null;
  hazard: 'none' | 'high';
  weight: number;
}

export interface MapSnapshot {
  resolution: number;
  origin: [number, number];
  width: number;
  height: number;
  p: number[][];
  classes: number[][];
  version: number;
}

export interface PathWarning {
  room_id: string;
  reason: 'on_path' | 'bypassed';
  weight: number;
}

export interface SemanticPathDto {
  semantic_path: string[];
  x_y_path: [number, number][];
  total_weight: number;
  warnings: PathWarning[];
}

export interface PlanResponse {
  goal: string;
  semantic_path: SemanticPathDto;
  metric_path: { points: [number, number][]; length: number };
}

export interface Weights {
  w_m_invisible: number;
  w_m_visible: number;
  area_thresholds: number[];
  area_weights: number[];
  scan_thresholds: number[];
  scan_weights: number[];
  w_h_high: number;
  w_d_push: number;
  w_d_pull: number;
  warning_threshold: number;
}

export interface PoseDto {
  x: number;
  y: number;
  theta: number;
}

export interface TelemetryTick {
  id: number;
  type: 'tick';
  seq: number;
  t: number;
  pose_est: PoseDto;
  pose_true: PoseDto;
  spread: number;
  waypoint_index: number;
  collided: boolean;
  diverged: boolean;
  arrived: boolean;
  map_version: number;
  mcl_cycles: number;
  route_warnings?: number;
}

export interface TelemetryMission {
  id: number;
  type: 'mission';
  goal: string | null;
  arrived: boolean;
  t: number;
}

export type TelemetryEvent = TelemetryTick | TelemetryMission;
