/**
 * Browser console wiring: canvas on the left, controls and live results on
 * the right. All recognition happens server-side; this file only moves
 * state between the DOM and the pure modules.
 */

import { connect, type Connection } from "./client.js";
import {
  CLASS_CURLS,
  CLASS_NAMES,
  gazeWeights,
  JOINT_COUNT,
  type Curls,
  type Joints,
} from "./kinematics.js";
import type { FrameMsg } from "./protocol.js";
import { parseServerMessage } from "./protocol.js";
import {
  paint,
  project,
  skeletonDrawList,
  unproject,
  type Projection,
} from "./renderer.js";
import {
  ReplayDriver,
  parseTranscript,
  transcriptFrames,
} from "./replay.js";
import {
  DEFAULT_FRAME_INTERVAL_MS,
  FrameSource,
  initialPuppet,
  puppetJoints,
  type PuppetState,
} from "./puppet.js";
import {
  applyServerMessage,
  initialView,
  withStatus,
  type SessionView,
} from "./session.js";

const $ = <T extends HTMLElement>(id: string) => document.getElementById(id) as T;

const canvas = $<HTMLCanvasElement>("scene");
const ctx = canvas.getContext("2d")!;
const projection: Projection = { scale: 90, cx: canvas.width / 2, cy: canvas.height * 0.72 };

let view: SessionView = initialView();
let puppet: PuppetState = initialPuppet();
let gaze: [number, number] | null = null;
let connection: Connection | null = null;
let source = new FrameSource(DEFAULT_FRAME_INTERVAL_MS);
let replay: ReplayDriver | null = null;
let replayPlaying = false;
let sendTimer: number | null = null;
let dragging = false;
let lastShownFrame: Joints | null = null;

const FINGERS = ["thumb", "index", "middle", "ring", "pinky"];

function warn(text: string) {
  const box = $("warning");
  box.textContent = text;
  box.classList.toggle("hidden", !text);
}

// ---------------------------------------------------------------------------
// Rendering loop (~display rate; emission cadence is separate)
// ---------------------------------------------------------------------------

function currentJoints(): Joints {
  if (lastShownFrame) return lastShownFrame;
  return puppetJoints(puppet);
}

function drawScene() {
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  const joints = currentJoints();
  const weights = gaze ? gazeWeights(joints, gaze) : null;
  paint(ctx, skeletonDrawList(joints, weights, projection));
  if (gaze) {
    const g = project(gaze, projection);
    ctx.strokeStyle = "#fab005";
    ctx.lineWidth = 1.5;
    ctx.beginPath();
    ctx.arc(g.x, g.y, 9, 0, 2 * Math.PI);
    ctx.stroke();
    ctx.beginPath();
    ctx.moveTo(g.x - 13, g.y);
    ctx.lineTo(g.x + 13, g.y);
    ctx.moveTo(g.x, g.y - 13);
    ctx.lineTo(g.x, g.y + 13);
    ctx.stroke();
  }
  requestAnimationFrame(drawScene);
}

// ---------------------------------------------------------------------------
// Results panel
// ---------------------------------------------------------------------------

function renderResults() {
  $("status").textContent = view.status;
  $("status").dataset.state = view.status;
  $("latency").textContent =
    view.latencyUs === null ? "-" : `${(view.latencyUs / 1000).toFixed(2)} ms`;
  $("current-label").textContent = view.currentLabel ?? "-";
  const bars = $("bars");
  const classes = view.classes.length ? view.classes : [...CLASS_NAMES];
  if (bars.childElementCount !== classes.length) {
    bars.innerHTML = "";
    for (const name of classes) {
      const row = document.createElement("div");
      row.className = "bar-row";
      row.innerHTML =
        `<span class="bar-name">${name}</span>` +
        `<div class="bar-track"><div class="bar-fill"></div></div>` +
        `<span class="bar-value">0.000</span>`;
      bars.appendChild(row);
    }
  }
  const probs = view.probs ?? classes.map(() => 0);
  classes.forEach((_, i) => {
    const row = bars.children[i] as HTMLElement;
    const fill = row.querySelector<HTMLElement>(".bar-fill")!;
    const value = row.querySelector<HTMLElement>(".bar-value")!;
    const p = probs[i] ?? 0;
    fill.style.width = `${(100 * p).toFixed(1)}%`;
    value.textContent = p.toFixed(3);
    row.classList.toggle("bar-top", view.currentLabel === classes[i]);
  });
  const history = $("history");
  history.innerHTML = view.labelHistory
    .slice(-12)
    .map((label) => `<li>${label}</li>`)
    .join("");
  $("error-line").textContent = view.lastError ?? "";
}

// ---------------------------------------------------------------------------
// Connection and emission
// ---------------------------------------------------------------------------

function setView(next: SessionView) {
  view = next;
  renderResults();
}

function sendTick() {
  if (!connection || !connection.open) return;
  if (replay && replayPlaying) {
    for (const frame of replay.tick(performance.now())) {
      connection.send(frame); // pass-through: recorded frames go out verbatim
      showReplayFrame(frame);
    }
    ($("jog") as HTMLInputElement).value = String(replay.position);
    if (replay.done) replayPlaying = false;
    return;
  }
  connection.send(source.buildFrame(puppet, gaze));
}

function showReplayFrame(frame: FrameMsg) {
  if (frame.joints.length === JOINT_COUNT) {
    lastShownFrame = frame.joints as Joints;
    gaze = frame.gaze;
  } else {
    warn(`dropped a replay frame with ${frame.joints.length} joints`);
  }
}

function doConnect() {
  connection?.close();
  setView(withStatus(initialView(), "connecting"));
  const url = ($("url") as HTMLInputElement).value;
  source = new FrameSource(DEFAULT_FRAME_INTERVAL_MS);
  connection = connect(url, {
    onOpen: () => {
      if (sendTimer !== null) clearInterval(sendTimer);
      sendTimer = window.setInterval(sendTick, DEFAULT_FRAME_INTERVAL_MS);
    },
    onMessage: (text) => {
      const msg = parseServerMessage(text);
      if (!msg) {
        console.warn("malformed server message", text);
        return; // display unchanged
      }
      setView(applyServerMessage(view, msg));
    },
    onClose: () => {
      if (sendTimer !== null) clearInterval(sendTimer);
      sendTimer = null;
      setView(withStatus(view, "disconnected"));
    },
  });
}

function doReset() {
  connection?.send({ type: "reset" });
  source.reset(); // new timestamp epoch
  setView({ ...view, probs: null, latencyUs: null, currentLabel: null });
}

// ---------------------------------------------------------------------------
// Controls
// ---------------------------------------------------------------------------

function bindControls() {
  $("connect").onclick = doConnect;
  $("reset").onclick = doReset;

  FINGERS.forEach((name, i) => {
    const slider = $(`curl-${name}`) as HTMLInputElement;
    slider.oninput = () => {
      const curls = [...puppet.curls] as Curls;
      curls[i] = Number(slider.value);
      puppet = { ...puppet, curls, preset: "free" };
      lastShownFrame = null;
      ($("preset") as HTMLSelectElement).value = "free";
    };
  });

  const preset = $("preset") as HTMLSelectElement;
  preset.onchange = () => {
    const name = preset.value;
    if (name !== "free" && CLASS_CURLS[name]) {
      puppet = { ...puppet, curls: [...CLASS_CURLS[name]] as Curls, preset: name };
      FINGERS.forEach((finger, i) => {
        ($(`curl-${finger}`) as HTMLInputElement).value = String(puppet.curls[i]);
      });
      lastShownFrame = null;
    }
  };

  canvas.onmousemove = (ev) => {
    const rect = canvas.getBoundingClientRect();
    const point = unproject(ev.clientX - rect.left, ev.clientY - rect.top, projection);
    if (dragging) {
      puppet = { ...puppet, offset: { x: point[0], y: point[1] } };
      lastShownFrame = null;
    }
    gaze = point; // mouse is the gaze proxy
  };
  canvas.onmousedown = () => (dragging = true);
  canvas.onmouseup = () => (dragging = false);
  canvas.onmouseleave = () => {
    dragging = false;
    if (!replay) gaze = null;
  };

  const jog = $("jog") as HTMLInputElement;
  jog.oninput = () => {
    if (replay) {
      replay.seek(Number(jog.value), performance.now());
      const idx = Math.min(
        replay.frames.length - 1,
        Math.floor(Number(jog.value) * replay.frames.length),
      );
      if (idx >= 0) showReplayFrame(replay.frames[idx]);
    }
  };

  $("play").onclick = () => {
    replayPlaying = replay !== null && !replayPlaying;
    $("play").textContent = replayPlaying ? "pause" : "play";
  };

  $("live").onclick = () => {
    replay = null;
    replayPlaying = false;
    lastShownFrame = null;
    $("replay-name").textContent = "live puppet";
  };

  const picker = $("file") as HTMLInputElement;
  picker.onchange = async () => {
    const file = picker.files?.[0];
    if (!file) return;
    const text = await file.text();
    try {
      replay = new ReplayDriver(framesFromFile(text), 30);
      replayPlaying = false;
      $("replay-name").textContent = `${file.name} (${replay.frames.length} frames)`;
      warn("");
    } catch (err) {
      warn(`could not load ${file.name}: ${err}`);
    }
  };
}

/** Accepts a golden transcript or a dataset JSONL file. */
function framesFromFile(text: string): FrameMsg[] {
  const firstLine = JSON.parse(text.split("\n").find((l) => l.trim()) ?? "null");
  if (firstLine && typeof firstLine === "object" && "dir" in firstLine) {
    return transcriptFrames(parseTranscript(text));
  }
  if (firstLine && typeof firstLine === "object" && "frames" in firstLine) {
    // dataset record: take the first sequence on the line's frames
    return (firstLine.frames as Array<{ t_ms: number; joints: number[][]; gaze: [number, number] | null }>).map(
      (f) => ({ type: "frame", t: f.t_ms, joints: f.joints, gaze: f.gaze ?? null }),
    );
  }
  throw new Error("not a golden transcript or dataset JSONL");
}

// ---------------------------------------------------------------------------

function populatePresets() {
  const preset = $("preset") as HTMLSelectElement;
  for (const name of ["free", ...CLASS_NAMES]) {
    const opt = document.createElement("option");
    opt.value = name;
    opt.textContent = name;
    preset.appendChild(opt);
  }
}

populatePresets();
bindControls();
renderResults();
requestAnimationFrame(drawScene);
