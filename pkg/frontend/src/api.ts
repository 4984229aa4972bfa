// Thin fetch wrappers around the operator service endpoints.

import type { MapSnapshot, PlanResponse, RoomInfo, Weights } from './types';

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

async function request<T>(base: string, method: string, path: string, body?: unknown): Promise<T> {
  const response = await fetch(base + path, {
    method,
    headers: { 'Content-Type': 'application/json' },
    body: body === undefined ? undefined : JSON.stringify(body),
  });
  const payload = await response.json().catch(() => ({}));
  if (!response.ok) {
    throw new ApiError(response.status, (payload as { error?: string }).error ?? response.statusText);
  }
  return payload as T;
}

export class ServiceClient {
  constructor(public base: string = '') {}

  building(): Promise<unknown> {
    return request(this.base, 'GET', '/building');
  }

  rooms(): Promise<RoomInfo[]> {
    return request(this.base, 'GET', '/rooms');
  }

  map(): Promise<MapSnapshot> {
    return request(this.base, 'GET', '/map');
  }

  weights(): Promise<Weights> {
    return request(this.base, 'GET', '/weights');
  }

  putWeights(weights: Weights): Promise<Weights> {
    return request(this.base, 'PUT', '/weights', weights);
  }

  plan(goalRoom: string): Promise<PlanResponse> {
    return request(this.base, 'POST', '/plan', { goal_room: goalRoom });
  }

  move(): Promise<{ status: string }> {
    return request(this.base, 'POST', '/move');
  }

  stop(): Promise<{ status: string }> {
    return request(this.base, 'POST', '/stop');
  }
}
