// End-to-end: spawn the real simulator server and drive it through the
// console's own view model over the raw stream framing. Guards the wire
// contract between the two halves of the project.

import { ChildProcess, spawn } from "node:child_process";
import { createConnection, Socket } from "node:net";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";
import { afterEach, describe, expect, it } from "vitest";

import { encodeCommand, nextCommandId } from "../src/protocol.js";
import {
  SessionView, applyLine, canAcknowledgeFault, initialView, recordCommand,
} from "../src/session.js";

const REPO_ROOT = join(dirname(fileURLToPath(import.meta.url)), "..", "..");

let server: ChildProcess | null = null;
let socket: Socket | null = null;

afterEach(() => {
  socket?.destroy();
  socket = null;
  server?.kill("SIGKILL");
  server = null;
});

function startServer(scenario: string): Promise<number> {
  return new Promise((resolve, reject) => {
    server = spawn("python3", [
      "-m", "probecast.cli", "serve", `scenarios/${scenario}.yaml`,
      "--port", "0", "--pace", "realtime", "--speed", "50",
    ], { cwd: REPO_ROOT });
    const timer = setTimeout(
      () => reject(new Error("server start timed out")), 15000);
    let buffered = "";
    server.stdout!.on("data", (chunk: Buffer) => {
      buffered += chunk.toString();
      const match = buffered.match(/serving .* on 127\.0\.0\.1:(\d+)/);
      if (match !== null) {
        clearTimeout(timer);
        resolve(Number(match[1]));
      }
    });
    server.on("exit", (code) => {
      clearTimeout(timer);
      reject(new Error(`server exited early (${code})`));
    });
  });
}

interface LiveClient {
  view: SessionView;
  send: (kind: string, args: Record<string, unknown>) => string;
  waitFor: (predicate: (view: SessionView) => boolean,
            timeoutMs: number) => Promise<void>;
}

function connectClient(port: number): Promise<LiveClient> {
  return new Promise((resolve, reject) => {
    const view = initialView();
    view.connection = "connecting";
    const waiters: Array<{
      predicate: (view: SessionView) => boolean;
      resolve: () => void;
    }> = [];
    let pending = "";
    const sock = createConnection({ host: "127.0.0.1", port }, () => {
      view.connection = "connected";
      resolve({
        view,
        send: (kind, args) => {
          const id = nextCommandId();
          recordCommand(view, id, kind, `${kind}`);
          sock.write(encodeCommand({
            kind: kind as never, command_id: id, arguments: args,
          }) + "\n");
          return id;
        },
        waitFor: (predicate, timeoutMs) => new Promise<void>(
          (res, rej) => {
            if (predicate(view)) {
              res();
              return;
            }
            const timer = setTimeout(
              () => rej(new Error("waitFor timed out")), timeoutMs);
            waiters.push({ predicate, resolve: () => {
              clearTimeout(timer);
              res();
            } });
          }),
      });
    });
    socket = sock;
    sock.on("error", reject);
    sock.on("data", (chunk: Buffer) => {
      pending += chunk.toString("utf-8");
      let index = pending.indexOf("\n");
      while (index >= 0) {
        applyLine(view, pending.slice(0, index));
        pending = pending.slice(index + 1);
        index = pending.indexOf("\n");
      }
      for (let i = waiters.length - 1; i >= 0; i -= 1) {
        if (waiters[i].predicate(view)) {
          waiters[i].resolve();
          waiters.splice(i, 1);
        }
      }
    });
  });
}

describe("live server through the console view model", () => {
  it("receives the snapshot, commands 5 m and settles within the deadband",
     async () => {
    const port = await startServer("lake_hertel");
    const client = await connectClient(port);
    await client.waitFor((v) => v.latest !== null, 10000);
    expect(client.view.protocolVersion).toBe(1);
    expect(client.view.scenario).toBe("lake_hertel");
    expect(client.view.spoolCapacity).toBe(10);

    const id = client.send("set_target_depth", { target_depth: 5.0 });
    await client.waitFor(
      (v) => v.commands.some((c) => c.id === id && c.status === "accepted"),
      10000);
    await client.waitFor(
      (v) => v.latest !== null && v.latest.mode === "holding" &&
        Math.abs(v.latest.probe_depth - 5.0) <= (v.deadband ?? 0.05) + 0.05,
      30000);
    // the chart's newest point is exactly the server's latest state
    const tail = client.view.series[client.view.series.length - 1];
    expect(tail.depth).toBe(client.view.latest!.probe_depth);
  }, 60000);

  it("raises the fault banner on an induced stall and clears it on one ack",
     async () => {
    const port = await startServer("vegetation_stall");
    const client = await connectClient(port);
    await client.waitFor((v) => v.latest !== null, 10000);

    client.send("start_mission", {});
    await client.waitFor((v) => v.faultBanner !== null, 30000);
    expect(client.view.faultBanner).toContain("stall");
    await client.waitFor((v) => canAcknowledgeFault(v), 10000);

    const id = client.send("ack_fault", {});
    await client.waitFor(
      (v) => v.commands.some((c) => c.id === id && c.status === "accepted"),
      10000);
    await client.waitFor((v) => v.faultBanner === null, 10000);
    expect(canAcknowledgeFault(client.view)).toBe(false);
    expect(client.view.faultCount).toBe(1);
  }, 60000);
});
