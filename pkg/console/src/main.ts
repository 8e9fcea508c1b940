// Operator console entry point: WebSocket wiring, controls, render loop.
// The view is rebuilt purely from received telemetry; there is no
// client-side extrapolation between updates.

import { drawDepthChart, drawTrackMap } from "./chart.js";
import {
  CommandKind, encodeCommand, nextCommandId,
} from "./protocol.js";
import {
  SessionView, applyLine, canAcknowledgeFault, initialView, recordCommand,
  targetBounds,
} from "./session.js";

const RETRY_BASE_MS = 1000;
const RETRY_MAX_MS = 10000;

function byId<T extends HTMLElement>(id: string): T {
  const el = document.getElementById(id);
  if (el === null) {
    throw new Error(`missing element #${id}`);
  }
  return el as T;
}

class Console {
  view: SessionView = initialView();
  socket: WebSocket | null = null;
  retryMs = RETRY_BASE_MS;
  endpoint: string;

  constructor(endpoint: string) {
    this.endpoint = endpoint;
    this.connect();
    this.wireControls();
    const render = () => {
      this.render();
      requestAnimationFrame(render);
    };
    requestAnimationFrame(render);
  }

  connect(): void {
    this.view = initialView();
    this.view.connection = "connecting";
    const socket = new WebSocket(this.endpoint);
    this.socket = socket;
    socket.onopen = () => {
      this.view.connection = "connected";
      this.retryMs = RETRY_BASE_MS;
    };
    socket.onmessage = (event) => {
      applyLine(this.view, String(event.data));
    };
    socket.onclose = () => {
      if (this.view.connection !== "version-mismatch") {
        this.view.connection = "closed";
        setTimeout(() => this.connect(), this.retryMs);
        this.retryMs = Math.min(this.retryMs * 2, RETRY_MAX_MS);
      }
    };
    socket.onerror = () => socket.close();
  }

  send(kind: CommandKind, args: Record<string, unknown>,
       summary: string): void {
    if (this.socket === null || this.socket.readyState !== WebSocket.OPEN) {
      this.view.notices.push("not connected; command dropped locally");
      return;
    }
    const id = nextCommandId();
    recordCommand(this.view, id, kind, summary);
    this.socket.send(encodeCommand({
      kind, command_id: id, arguments: args,
    }));
  }

  wireControls(): void {
    const targetInput = byId<HTMLInputElement>("target-input");
    byId<HTMLButtonElement>("target-send").onclick = () => {
      const target = Number(targetInput.value);
      this.send("set_target_depth", { target_depth: target },
                `target ${target} m`);
    };
    byId<HTMLButtonElement>("step-down").onclick = () =>
      this.send("manual_step", { direction: "down", step_line: 0.25 },
                "step down 0.25 m");
    byId<HTMLButtonElement>("step-up").onclick = () =>
      this.send("manual_step", { direction: "up", step_line: 0.25 },
                "step up 0.25 m");
    byId<HTMLButtonElement>("underway").onclick = () =>
      this.send("set_underway", {}, "go underway");
    byId<HTMLButtonElement>("mission-start").onclick = () =>
      this.send("start_mission", {}, "start mission");
    byId<HTMLButtonElement>("mission-pause").onclick = () =>
      this.send("pause", {}, "pause");
    byId<HTMLButtonElement>("mission-resume").onclick = () =>
      this.send("resume", {}, "resume");
    byId<HTMLButtonElement>("fault-ack").onclick = () =>
      this.send("ack_fault", {}, "acknowledge fault");
  }

  render(): void {
    const view = this.view;
    const status = byId<HTMLSpanElement>("conn-status");
    status.textContent = view.connection;
    status.className = `status status-${view.connection}`;
    byId<HTMLSpanElement>("scenario-name").textContent =
      view.scenario ?? "(no scenario)";

    const banner = byId<HTMLDivElement>("version-banner");
    banner.hidden = !view.versionMismatch;
    if (view.versionMismatch) {
      banner.textContent =
        `protocol version mismatch: server sent ${view.protocolVersion}`;
    }

    const fault = byId<HTMLDivElement>("fault-banner");
    const ackButton = byId<HTMLButtonElement>("fault-ack");
    if (view.faultBanner !== null) {
      fault.hidden = false;
      byId<HTMLSpanElement>("fault-text").textContent = view.faultBanner;
    } else {
      fault.hidden = true;
    }
    ackButton.disabled = !canAcknowledgeFault(view);

    const latest = view.latest;
    if (latest !== null) {
      byId<HTMLSpanElement>("depth-readout").textContent =
        `${latest.probe_depth.toFixed(2)} m`;
      byId<HTMLSpanElement>("fused-readout").textContent =
        `${latest.fused_depth.toFixed(2)} m`;
      byId<HTMLSpanElement>("target-readout").textContent =
        latest.target_depth === null ? "-" :
          `${latest.target_depth.toFixed(2)} m`;
      byId<HTMLSpanElement>("mode-badge").textContent = latest.mode;
      byId<HTMLSpanElement>("mode-badge").className =
        `badge mode-${latest.mode}`;
      byId<HTMLSpanElement>("relay-indicator").textContent = latest.relay;
      byId<HTMLSpanElement>("relay-indicator").className =
        `badge relay-${latest.relay}`;
      const spool = view.spoolCapacity ?? 10;
      byId<HTMLSpanElement>("line-readout").textContent =
        `${latest.line_out.toFixed(2)} / ${spool.toFixed(1)} m`;
      byId<HTMLProgressElement>("line-gauge").value = latest.line_out;
      byId<HTMLProgressElement>("line-gauge").max = spool;
      byId<HTMLSpanElement>("taut-readout").textContent =
        latest.tether_taut ? "taut" : "slack";
      const bounds = targetBounds(view);
      const input = byId<HTMLInputElement>("target-input");
      input.min = String(bounds.min);
      input.max = String(bounds.max);
      byId<HTMLSpanElement>("target-bounds").textContent =
        `${bounds.min}-${bounds.max} m`;
    }
    byId<HTMLSpanElement>("gap-count").textContent =
      view.gapCount === 0 ? "none" : `${view.gapCount}`;
    byId<HTMLSpanElement>("mission-status").textContent =
      view.missionStatus ?? "-";

    const valuesBody = byId<HTMLTableSectionElement>("values-body");
    const rows = view.parameters.length > 0 ? view.parameters
      : Object.keys(view.values).sort();
    valuesBody.innerHTML = rows.map((name) => {
      const value = view.values[name];
      const text = value === undefined ? "-" : value.toFixed(3);
      return `<tr><td>${name}</td><td>${text}</td></tr>`;
    }).join("");

    const history = byId<HTMLUListElement>("command-history");
    history.innerHTML = [...view.commands].reverse().slice(0, 12)
      .map((c) => {
        const reason = c.reason !== null && c.status === "rejected"
          ? ` - ${c.reason}` : "";
        return `<li class="cmd-${c.status}">` +
          `[${c.status}] ${c.summary}${reason}</li>`;
      }).join("");

    const notices = byId<HTMLUListElement>("event-log");
    notices.innerHTML = [...view.notices].reverse().slice(0, 10)
      .map((n) => `<li>${n}</li>`).join("");

    drawDepthChart(byId<HTMLCanvasElement>("depth-chart"), view,
                   { windowSeconds: 120 });
    drawTrackMap(byId<HTMLCanvasElement>("track-map"), view);
  }
}

function endpointFromLocation(): string {
  const params = new URLSearchParams(window.location.search);
  const override = params.get("endpoint");
  if (override !== null) {
    return override;
  }
  const host = window.location.hostname || "127.0.0.1";
  const port = window.location.port || "8765";
  return `ws://${host}:${port}/ws`;
}

window.addEventListener("load", () => {
  new Console(endpointFromLocation());
});
