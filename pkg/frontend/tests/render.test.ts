import { describe, expect, it } from 'vitest';

import {
  describeScanAge,
  gridToRgba,
  metricPathPolyline,
  poseTriangle,
  viewportFor,
  waypointMarkers,
  worldToCanvas,
} from '../src/render';
import type { MapSnapshot, PlanResponse } from '../src/types';

import mapFixture from './fixtures/map.json';
import planFixture from './fixtures/plan_hazard.json';

const map = mapFixture as unknown as MapSnapshot;
const plan = planFixture as unknown as PlanResponse;

describe('viewport', () => {
  it('renders at no less than 2 px per cell', () => {
    const view = viewportFor(map);
    expect(view.pxPerCell).toBeGreaterThanOrEqual(2);
    expect(view.width).toBe(map.width * view.pxPerCell);
  });
});

describe('grid raster', () => {
  it('produces one rgba pixel per cell', () => {
    const rgba = gridToRgba(map);
    expect(rgba.length).toBe(map.width * map.height * 4);
  });

  it('occupied cells are dark, free cells light, glass tinted', () => {
    const rgba = gridToRgba(map);
    const at = (ix: number, iy: number) => {
      const row = map.height - 1 - iy;
      const offset = (row * map.width + ix) * 4;
      return [rgba[offset], rgba[offset + 1], rgba[offset + 2]];
    };
    let sawWall = false;
    let sawFree = false;
    let sawGlass = false;
    for (let iy = 0; iy < map.height; iy++) {
      for (let ix = 0; ix < map.width; ix++) {
        const [r, g, b] = at(ix, iy);
        if (map.p[iy][ix] >= 0.5 && map.classes[iy][ix] === 2) {
          sawGlass = true;
          expect(b).toBeGreaterThan(r); // blue tint
        } else if (map.p[iy][ix] >= 0.5) {
          sawWall = true;
          expect(r).toBeLessThan(60);
        } else {
          sawFree = true;
          expect(r).toBeGreaterThan(200);
        }
        expect(g).toBeGreaterThanOrEqual(0);
      }
    }
    expect(sawWall && sawFree && sawGlass).toBe(true);
  });
});

describe('coordinate transform', () => {
  it('maps the origin corner to the bottom-left of the canvas', () => {
    const view = viewportFor(map);
    const [cx, cy] = worldToCanvas(map, view, map.origin[0], map.origin[1]);
    expect(cx).toBe(0);
    expect(cy).toBe(view.height);
  });

  it('y grows upward in world space, downward on canvas', () => {
    const view = viewportFor(map);
    const [, lowY] = worldToCanvas(map, view, 1.0, 1.0);
    const [, highY] = worldToCanvas(map, view, 1.0, 5.0);
    expect(highY).toBeLessThan(lowY);
  });
});

describe('route overlay geometry', () => {
  it('creates one marker per route element, rooms and doors alternating', () => {
    const view = viewportFor(map);
    const markers = waypointMarkers(
      map, view, plan.semantic_path.semantic_path, plan.semantic_path.x_y_path,
    );
    expect(markers.length).toBe(plan.semantic_path.x_y_path.length);
    expect(markers[0].kind).toBe('room');
    expect(markers[1].kind).toBe('door');
    expect(markers[0].label).toBe('lab-west');
    // marker canvas positions correspond exactly to the payload coordinates
    markers.forEach((marker, i) => {
      const [wx, wy] = plan.semantic_path.x_y_path[i];
      const [cx, cy] = worldToCanvas(map, view, wx, wy);
      expect(marker.x).toBeCloseTo(cx, 6);
      expect(marker.y).toBeCloseTo(cy, 6);
    });
  });

  it('pose marker and metric polyline serialize to svg point lists', () => {
    const view = viewportFor(map);
    const triangle = poseTriangle(map, view, { x: 2.5, y: 4.0, theta: 0.0 });
    expect(triangle.split(' ').length).toBe(3);
    const polyline = metricPathPolyline(map, view, plan.metric_path.points);
    expect(polyline.split(' ').length).toBe(plan.metric_path.points.length);
  });
});

describe('scan age labels', () => {
  it('covers the three bands and the never case', () => {
    expect(describeScanAge(null)).toBe('never scanned');
    expect(describeScanAge(3600)).toBe('scanned today');
    expect(describeScanAge(3 * 86400)).toContain('3 d');
    expect(describeScanAge(21 * 86400)).toContain('3 w');
  });
});
