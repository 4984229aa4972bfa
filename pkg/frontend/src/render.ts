// Pure rendering helpers: map snapshot -> pixel buffer, world -> screen
// transforms, marker geometry. Kept free of DOM access so they are testable.

import type { MapSnapshot, PoseDto } from './types';

export interface Viewport {
  pxPerCell: number;
  width: number; // canvas pixels
  height: number;
}

export function viewportFor(map: MapSnapshot, minPxPerCell = 2, maxCanvas = 1000): Viewport {
  const pxPerCell = Math.max(
    minPxPerCell,
    Math.floor(Math.min(maxCanvas / map.width, maxCanvas / map.height)),
  );
  return { pxPerCell, width: map.width * pxPerCell, height: map.height * pxPerCell };
}

// occupancy probability -> gray; class tints: glass cells blue-ish, other
// classified cells warm so material structure is visible on the map
const CLASS_TINT: Record<number, [number, number, number]> = {
  2: [90, 140, 235],
};

export function gridToRgba(map: MapSnapshot) {
  const out = new Uint8ClampedArray(map.width * map.height * 4);
  for (let iy = 0; iy < map.height; iy++) {
    // row 0 of the grid is the bottom of the world; canvas rows go top-down
    const row = map.height - 1 - iy;
    for (let ix = 0; ix < map.width; ix++) {
      const p = map.p[iy][ix];
      const cls = map.classes[iy][ix];
      const base = Math.round(255 * (1 - p));
      let r = base;
      let g = base;
      let b = base;
      if (p >= 0.5 && CLASS_TINT[cls]) {
        [r, g, b] = CLASS_TINT[cls];
      }
      const offset = (row * map.width + ix) * 4;
      out[offset] = r;
      out[offset + 1] = g;
      out[offset + 2] = b;
      out[offset + 3] = 255;
    }
  }
  return out;
}

export function worldToCanvas(
  map: MapSnapshot,
  view: Viewport,
  x: number,
  y: number,
): [number, number] {
  const cx = ((x - map.origin[0]) / map.resolution) * view.pxPerCell;
  const cy = view.height - ((y - map.origin[1]) / map.resolution) * view.pxPerCell;
  return [cx, cy];
}

export interface Marker {
  x: number;
  y: number;
  kind: 'room' | 'door';
  label: string;
}

/** Waypoint markers for a route: room and door centers in canvas pixels,
 *  in route order (rooms at even indices of the id sequence). */
export function waypointMarkers(
  map: MapSnapshot,
  view: Viewport,
  ids: string[],
  xy: [number, number][],
): Marker[] {
  return xy.map(([wx, wy], i) => {
    const [x, y] = worldToCanvas(map, view, wx, wy);
    return { x, y, kind: i % 2 === 0 ? 'room' : 'door', label: ids[i] } as Marker;
  });
}

export function poseTriangle(
  map: MapSnapshot,
  view: Viewport,
  pose: PoseDto,
  sizePx = 10,
): string {
  const [cx, cy] = worldToCanvas(map, view, pose.x, pose.y);
  // canvas y grows downward, so the heading flips sign
  const th = -pose.theta;
  const tip: [number, number] = [cx + sizePx * Math.cos(th), cy + sizePx * Math.sin(th)];
  const left: [number, number] = [
    cx + 0.5 * sizePx * Math.cos(th + 2.5),
    cy + 0.5 * sizePx * Math.sin(th + 2.5),
  ];
  const right: [number, number] = [
    cx + 0.5 * sizePx * Math.cos(th - 2.5),
    cy + 0.5 * sizePx * Math.sin(th - 2.5),
  ];
  return [tip, left, right].map(([px, py]) => `${px.toFixed(1)},${py.toFixed(1)}`).join(' ');
}

export function metricPathPolyline(
  map: MapSnapshot,
  view: Viewport,
  points: [number, number][],
): string {
  return points
    .map(([x, y]) => worldToCanvas(map, view, x, y))
    .map(([px, py]) => `${px.toFixed(1)},${py.toFixed(1)}`)
    .join(' ');
}

export function describeScanAge(scanAgeS: number | null): string {
  if (scanAgeS === null) return 'never scanned';
  const days = scanAgeS / 86400;
  if (days < 1) return 'scanned today';
  if (days < 14) return `scanned ${Math.round(days)} d ago`;
  return `scanned ${Math.round(days / 7)} w ago`;
}
