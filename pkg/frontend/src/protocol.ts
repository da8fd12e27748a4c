/**
 * Wire protocol types and parsing for the teleop session server.
 *
 * JSON text frames over a websocket; every message carries a version field.
 * The client refuses to run against a different protocol version.
 */

export const PROTOCOL_VERSION = 1;

export interface ActuatorEcho {
  sail_angle: number;
  sail_released: boolean;
  rudder_angle: number;
  pwm_left: number;
  pwm_right: number;
}

export interface StateBroadcast {
  type: 'state';
  version: number;
  tick: number;
  t: number;
  x: number;
  y: number;
  psi: number;
  u: number;
  v: number;
  r: number;
  wind_speed: number;
  wind_dir: number;
  actuator: ActuatorEcho;
  sail_force_scale: number;
  clamped: string[];
  events: string[];
  paused: boolean;
}

export interface HelloMessage {
  type: 'hello';
  version: number;
  scenario: Record<string, unknown>;
  seed: number;
  dt: number;
  steps_per_second: number;
  broadcast_hz: number;
}

export interface SessionRecordMessage {
  type: 'session_record';
  version: number;
  scenario: Record<string, unknown>;
  seed: number;
  dt: number;
  commands: Array<Record<string, unknown>>;
  trajectory_csv: string;
}

export interface ErrorMessage {
  type: 'error';
  version: number;
  code: string;
  message: string;
}

export interface PongMessage {
  type: 'pong';
  version: number;
  tick: number;
}

export type ServerMessage =
  | StateBroadcast
  | HelloMessage
  | SessionRecordMessage
  | ErrorMessage
  | PongMessage;

export interface Command {
  sail_angle: number;
  sail_released: boolean;
  rudder_angle: number;
  pwm_left: number;
  pwm_right: number;
}

export class ProtocolMismatch extends Error {
  constructor(public readonly got: number) {
    super(
      `server speaks protocol version ${got}, this client needs ${PROTOCOL_VERSION}`,
    );
  }
}

function isFiniteNumber(v: unknown): v is number {
  return typeof v === 'number' && Number.isFinite(v);
}

/** Parse one frame; throws on garbage and on version mismatch. */
export function parseServerMessage(raw: string): ServerMessage {
  let data: unknown;
  try {
    data = JSON.parse(raw);
  } catch {
    throw new Error('frame is not valid JSON');
  }
  if (typeof data !== 'object' || data === null) {
    throw new Error('frame is not an object');
  }
  const msg = data as Record<string, unknown>;
  if (typeof msg.type !== 'string') {
    throw new Error("frame has no 'type'");
  }
  if (msg.version !== PROTOCOL_VERSION) {
    throw new ProtocolMismatch(typeof msg.version === 'number' ? msg.version : NaN);
  }
  if (msg.type === 'state') {
    for (const key of ['tick', 't', 'x', 'y', 'psi', 'u', 'v', 'r', 'wind_speed', 'wind_dir']) {
      if (!isFiniteNumber(msg[key])) {
        throw new Error(`state frame field ${key} is not a finite number`);
      }
    }
    if (typeof msg.actuator !== 'object' || msg.actuator === null) {
      throw new Error('state frame has no actuator echo');
    }
  }
  return msg as unknown as ServerMessage;
}

export function encodeCommand(cmd: Command): string {
  return JSON.stringify({ type: 'command', version: PROTOCOL_VERSION, ...cmd });
}

export function encodeControl(fields: Record<string, unknown>): string {
  return JSON.stringify({ type: 'control', version: PROTOCOL_VERSION, ...fields });
}

export function commandsEqual(a: Command, b: Command): boolean {
  return (
    a.sail_angle === b.sail_angle &&
    a.sail_released === b.sail_released &&
    a.rudder_angle === b.rudder_angle &&
    a.pwm_left === b.pwm_left &&
    a.pwm_right === b.pwm_right
  );
}

export const NEUTRAL_COMMAND: Command = {
  sail_angle: 0,
  sail_released: false,
  rudder_angle: 0,
  pwm_left: 0,
  pwm_right: 0,
};
