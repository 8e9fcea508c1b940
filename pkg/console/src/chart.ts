// Scrolling depth-vs-time strip chart on a plain canvas. Depth axis points
// down, like the water column. Gaps in the telemetry sequence are drawn as
// amber ticks so missing data is visible rather than smoothed over.

import { SeriesPoint, SessionView } from "./session.js";

export interface ChartOptions {
  windowSeconds: number;
}

const COLORS = {
  background: "#10141a",
  grid: "#2a3440",
  label: "#8fa1b3",
  depth: "#4fc3f7",
  fused: "#a5d6a7",
  lineOut: "#90a4ae",
  target: "#ffb74d",
  gap: "#ffab40",
};

export function drawDepthChart(canvas: HTMLCanvasElement, view: SessionView,
                               options: ChartOptions): void {
  const ctx = canvas.getContext("2d");
  if (ctx === null) {
    return;
  }
  const { width, height } = canvas;
  ctx.fillStyle = COLORS.background;
  ctx.fillRect(0, 0, width, height);
  if (view.series.length === 0) {
    ctx.fillStyle = COLORS.label;
    ctx.fillText("waiting for telemetry", 12, 20);
    return;
  }

  const tMax = view.series[view.series.length - 1].time;
  const tMin = tMax - options.windowSeconds;
  const points = view.series.filter((p) => p.time >= tMin);
  const spool = view.spoolCapacity ?? 10;
  const deepest = Math.max(spool, ...points.map((p) => p.depth));
  const depthMax = deepest * 1.08 + 0.2;

  const left = 34;
  const toX = (t: number) =>
    left + ((t - tMin) / options.windowSeconds) * (width - left - 6);
  const toY = (d: number) => 8 + (d / depthMax) * (height - 26);

  ctx.strokeStyle = COLORS.grid;
  ctx.fillStyle = COLORS.label;
  ctx.font = "10px monospace";
  ctx.lineWidth = 1;
  const gridStep = depthMax > 12 ? 5 : 2;
  for (let d = 0; d <= depthMax; d += gridStep) {
    const y = toY(d);
    ctx.beginPath();
    ctx.moveTo(left, y);
    ctx.lineTo(width - 6, y);
    ctx.stroke();
    ctx.fillText(`${d}m`, 4, y + 3);
  }

  const trace = (value: (p: SeriesPoint) => number, color: string,
                 lineWidth: number) => {
    ctx.strokeStyle = color;
    ctx.lineWidth = lineWidth;
    ctx.beginPath();
    let pen = false;
    for (const p of points) {
      const x = toX(p.time);
      const y = toY(value(p));
      if (!pen || p.gapBefore) {
        ctx.moveTo(x, y);
        pen = true;
      } else {
        ctx.lineTo(x, y);
      }
    }
    ctx.stroke();
  };

  trace((p) => p.lineOut, COLORS.lineOut, 1);
  trace((p) => p.fused, COLORS.fused, 1);
  trace((p) => p.depth, COLORS.depth, 2);

  const target = points[points.length - 1].target;
  if (target !== null) {
    ctx.strokeStyle = COLORS.target;
    ctx.setLineDash([5, 4]);
    ctx.beginPath();
    ctx.moveTo(left, toY(target));
    ctx.lineTo(width - 6, toY(target));
    ctx.stroke();
    ctx.setLineDash([]);
  }

  ctx.strokeStyle = COLORS.gap;
  ctx.lineWidth = 2;
  for (const p of points) {
    if (p.gapBefore) {
      const x = toX(p.time);
      ctx.beginPath();
      ctx.moveTo(x, 4);
      ctx.lineTo(x, height - 18);
      ctx.stroke();
    }
  }

  ctx.fillStyle = COLORS.label;
  ctx.fillText(`t=${tMax.toFixed(1)}s`, width - 76, height - 6);
}

export function drawTrackMap(canvas: HTMLCanvasElement,
                             view: SessionView): void {
  const ctx = canvas.getContext("2d");
  if (ctx === null || view.latest === null || view.series.length === 0) {
    return;
  }
  const { width, height } = canvas;
  ctx.fillStyle = COLORS.background;
  ctx.fillRect(0, 0, width, height);
  ctx.strokeStyle = COLORS.grid;
  ctx.strokeRect(0.5, 0.5, width - 1, height - 1);

  const fixes = view.series;
  const lats = fixes.map((p) => p.lat);
  const lons = fixes.map((p) => p.lon);
  const latMid = (Math.min(...lats) + Math.max(...lats)) / 2;
  // metres per degree on the local tangent plane, east squashed by cos(lat)
  const mPerDegLat = 111320;
  const mPerDegLon = mPerDegLat * Math.cos((latMid * Math.PI) / 180);
  const spanLat = Math.max(...lats) - Math.min(...lats);
  const spanLon = Math.max(...lons) - Math.min(...lons);
  const spanM = Math.max(spanLat * mPerDegLat, spanLon * mPerDegLon, 20);
  const scale = (Math.min(width, height) - 24) / spanM;
  const toXY = (lat: number, lon: number): [number, number] => [
    width / 2 + (lon - view.latest!.asv.lon) * mPerDegLon * scale,
    height / 2 - (lat - view.latest!.asv.lat) * mPerDegLat * scale,
  ];

  ctx.strokeStyle = COLORS.lineOut;
  ctx.lineWidth = 1;
  ctx.beginPath();
  fixes.forEach((p, i) => {
    const [x, y] = toXY(p.lat, p.lon);
    if (i === 0) {
      ctx.moveTo(x, y);
    } else {
      ctx.lineTo(x, y);
    }
  });
  ctx.stroke();

  const fix = view.latest.asv;
  const [cx, cy] = toXY(fix.lat, fix.lon);
  ctx.fillStyle = COLORS.target;
  ctx.beginPath();
  ctx.arc(cx, cy, 5, 0, Math.PI * 2);
  ctx.fill();
  ctx.strokeStyle = COLORS.target;
  ctx.beginPath();
  ctx.moveTo(cx, cy);
  ctx.lineTo(cx + 12 * Math.sin(fix.heading_rad),
             cy - 12 * Math.cos(fix.heading_rad));
  ctx.stroke();

  ctx.fillStyle = COLORS.label;
  ctx.font = "10px monospace";
  ctx.fillText(fix.lat.toFixed(5), 6, 14);
  ctx.fillText(fix.lon.toFixed(5), 6, 26);
}
