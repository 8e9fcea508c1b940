// Session view model: a pure fold over the received telemetry stream.
// Nothing here simulates physics; reconnecting and replaying the same
// snapshot+stream always rebuilds the identical view.

import {
  AckPayload, FaultPayload, MissionEventPayload, PROTOCOL_VERSION,
  SamplePayload, StatePayload, TelemetryMessage, decodeTelemetry,
} from "./protocol.js";

export const MAX_SERIES_POINTS = 6000;

export type ConnectionState =
  "idle" | "connecting" | "connected" | "closed" | "version-mismatch";

export interface SeriesPoint {
  time: number;
  depth: number;
  fused: number;
  lineOut: number;
  target: number | null;
  lat: number;
  lon: number;
  gapBefore: boolean;
}

export type CommandStatus = "pending" | "accepted" | "rejected";

export interface CommandEntry {
  id: string;
  kind: string;
  summary: string;
  status: CommandStatus;
  reason: string | null;
}

export interface SessionView {
  connection: ConnectionState;
  protocolVersion: number | null;
  versionMismatch: boolean;
  scenario: string | null;
  spoolCapacity: number | null;
  deadband: number | null;
  parameters: string[];
  latest: StatePayload | null;
  series: SeriesPoint[];
  values: Record<string, number>;
  lastSampleTime: number | null;
  faultBanner: string | null;
  faultCount: number;
  commands: CommandEntry[];
  notices: string[];
  missionStatus: string | null;
  lastSeq: number | null;
  gapCount: number;
  gapPending: boolean;
  parseErrors: number;
}

export function initialView(): SessionView {
  return {
    connection: "idle",
    protocolVersion: null,
    versionMismatch: false,
    scenario: null,
    spoolCapacity: null,
    deadband: null,
    parameters: [],
    latest: null,
    series: [],
    values: {},
    lastSampleTime: null,
    faultBanner: null,
    faultCount: 0,
    commands: [],
    notices: [],
    missionStatus: null,
    lastSeq: null,
    gapCount: 0,
    gapPending: false,
    parseErrors: 0,
  };
}

export function recordCommand(view: SessionView, id: string, kind: string,
                              summary: string): void {
  view.commands.push({ id, kind, summary, status: "pending", reason: null });
  if (view.commands.length > 50) {
    view.commands.shift();
  }
}

function trackSequence(view: SessionView, seq: number): void {
  if (view.lastSeq !== null && seq !== view.lastSeq + 1) {
    view.gapCount += 1;
    view.gapPending = true;
  }
  view.lastSeq = seq;
}

function applyState(view: SessionView, payload: StatePayload): void {
  if (payload.snapshot) {
    view.protocolVersion = payload.protocol_version ?? null;
    if (payload.protocol_version !== PROTOCOL_VERSION) {
      view.versionMismatch = true;
      view.connection = "version-mismatch";
      return;
    }
    view.scenario = payload.scenario ?? null;
    view.spoolCapacity = payload.spool_capacity_m ?? null;
    view.deadband = payload.deadband_m ?? null;
    view.parameters = payload.parameters ?? [];
  }
  view.latest = payload;
  view.faultBanner = payload.fault_reason;
  view.series.push({
    time: payload.time,
    depth: payload.probe_depth,
    fused: payload.fused_depth,
    lineOut: payload.line_out,
    target: payload.target_depth,
    lat: payload.asv.lat,
    lon: payload.asv.lon,
    gapBefore: view.gapPending,
  });
  view.gapPending = false;
  if (view.series.length > MAX_SERIES_POINTS) {
    view.series.splice(0, view.series.length - MAX_SERIES_POINTS);
  }
}

function applySample(view: SessionView, payload: SamplePayload): void {
  view.values = payload.values;
  view.lastSampleTime = payload.timestamp;
}

function applyFault(view: SessionView, payload: FaultPayload): void {
  view.faultCount += 1;
  view.faultBanner = payload.reason;
}

function applyAck(view: SessionView, payload: AckPayload): void {
  if (payload.command_id === null) {
    view.notices.push(`rejected message: ${payload.reason}`);
    return;
  }
  const entry = view.commands.find((c) => c.id === payload.command_id);
  if (entry === undefined) {
    return;               // ack addressed to a command we did not send
  }
  entry.status = payload.accepted ? "accepted" : "rejected";
  entry.reason = payload.reason;
}

function applyMissionEvent(view: SessionView,
                           payload: MissionEventPayload): void {
  view.missionStatus = payload.event;
  view.notices.push(`t=${payload.time.toFixed(1)}s ${payload.event}`);
  if (view.notices.length > 50) {
    view.notices.shift();
  }
}

export function applyMessage(view: SessionView,
                             message: TelemetryMessage): SessionView {
  if (view.versionMismatch) {
    return view;          // blocked until reconnect against a matching server
  }
  trackSequence(view, message.seq);
  switch (message.kind) {
    case "state":
      applyState(view, message.payload as unknown as StatePayload);
      break;
    case "sample":
      applySample(view, message.payload as unknown as SamplePayload);
      break;
    case "fault":
      applyFault(view, message.payload as unknown as FaultPayload);
      break;
    case "ack":
      applyAck(view, message.payload as unknown as AckPayload);
      break;
    case "mission_event":
      applyMissionEvent(view,
                        message.payload as unknown as MissionEventPayload);
      break;
  }
  return view;
}

export function applyLine(view: SessionView, line: string): SessionView {
  let message: TelemetryMessage | null;
  try {
    message = decodeTelemetry(line);
  } catch {
    view.parseErrors += 1;
    return view;
  }
  if (message !== null) {
    applyMessage(view, message);
  }
  return view;
}

export function canAcknowledgeFault(view: SessionView): boolean {
  return view.latest !== null && view.latest.mode === "fault";
}

export function targetBounds(view: SessionView): { min: number; max: number } {
  return { min: 0, max: view.spoolCapacity ?? 10 };
}
