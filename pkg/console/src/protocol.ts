// Wire schema mirror of docs/protocol.md (version 1). One JSON document
// per line (raw stream) or per WebSocket text frame.

export const PROTOCOL_VERSION = 1;

export const TELEMETRY_KINDS = [
  "state", "sample", "fault", "ack", "mission_event",
] as const;
export type TelemetryKind = (typeof TELEMETRY_KINDS)[number];

export const COMMAND_KINDS = [
  "set_target_depth", "manual_step", "set_underway",
  "start_mission", "pause", "resume", "ack_fault",
] as const;
export type CommandKind = (typeof COMMAND_KINDS)[number];

export interface AsvFix {
  lat: number;
  lon: number;
  heading_rad: number;
}

export interface StatePayload {
  time: number;
  probe_depth: number;
  fused_depth: number;
  line_out: number;
  tether_taut: boolean;
  relay: string;
  mode: string;
  target_depth: number | null;
  fault_reason: string | null;
  asv: AsvFix;
  // snapshot extras (first state message of a connection)
  snapshot?: boolean;
  protocol_version?: number;
  scenario?: string;
  spool_capacity_m?: number;
  deadband_m?: number;
  parameters?: string[];
}

export interface SamplePayload {
  timestamp: number;
  lat: number;
  lon: number;
  depth: number;
  mode: string;
  values: Record<string, number>;
}

export interface FaultPayload {
  time: number;
  reason: string;
  depth: number;
  line_out: number;
}

export interface AckPayload {
  command_id: string | null;
  accepted: boolean;
  reason: string;
}

export interface MissionEventPayload {
  time: number;
  event: string;
  [extra: string]: unknown;
}

export interface TelemetryMessage {
  kind: TelemetryKind;
  seq: number;
  payload: Record<string, unknown>;
}

export interface CommandMessage {
  kind: CommandKind;
  command_id: string;
  arguments: Record<string, unknown>;
}

export class ProtocolError extends Error {}

function isObject(value: unknown): value is Record<string, unknown> {
  return typeof value === "object" && value !== null && !Array.isArray(value);
}

export function decodeTelemetry(line: string): TelemetryMessage | null {
  const text = line.trim();
  if (text === "") {
    return null;
  }
  let raw: unknown;
  try {
    raw = JSON.parse(text);
  } catch (err) {
    throw new ProtocolError(`bad JSON: ${(err as Error).message}`);
  }
  if (!isObject(raw)) {
    throw new ProtocolError("message must be an object");
  }
  const kind = raw["kind"];
  if (typeof kind !== "string" ||
      !(TELEMETRY_KINDS as readonly string[]).includes(kind)) {
    throw new ProtocolError(`unknown telemetry kind ${JSON.stringify(kind)}`);
  }
  const seq = raw["seq"];
  if (typeof seq !== "number" || !Number.isInteger(seq)) {
    throw new ProtocolError(`telemetry ${kind} needs an integer seq`);
  }
  const payload = raw["payload"] ?? {};
  if (!isObject(payload)) {
    throw new ProtocolError("telemetry payload must be an object");
  }
  return { kind: kind as TelemetryKind, seq, payload };
}

export function encodeCommand(message: CommandMessage): string {
  if (!(COMMAND_KINDS as readonly string[]).includes(message.kind)) {
    throw new ProtocolError(`unknown command kind ${message.kind}`);
  }
  if (!message.command_id) {
    throw new ProtocolError("command needs a non-empty command_id");
  }
  return JSON.stringify({
    kind: message.kind,
    command_id: message.command_id,
    arguments: message.arguments,
  });
}

let commandCounter = 0;

export function nextCommandId(): string {
  commandCounter += 1;
  const noise = Math.random().toString(36).slice(2, 8);
  return `ui-${commandCounter}-${noise}`;
}
