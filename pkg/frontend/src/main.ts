// DOM wiring: inputs, pointer capture for the X0 handle, and the render loop.

import { httpTransport } from "./api.js";
import { ExplorerModel, UiState } from "./model.js";
import { isOnBasinStrip, isOnHandle, renderScene } from "./render.js";
import { Frame, clampToViewportX, pxToWorldX } from "./transform.js";

const canvas = document.getElementById("plot") as HTMLCanvasElement;
const ctx = canvas.getContext("2d") as CanvasRenderingContext2D;
const functionInput = document.getElementById("function") as HTMLInputElement;
const x0Input = document.getElementById("x0") as HTMLInputElement;
const kSlider = document.getElementById("k-slider") as HTMLInputElement;
const kNumber = document.getElementById("k-number") as HTMLInputElement;
const basinButton = document.getElementById("basin-toggle") as HTMLButtonElement;
const bannerBox = document.getElementById("banner") as HTMLDivElement;

const frame: Frame = { width: canvas.width, height: canvas.height, margin: 12 };

function renderBanner(state: UiState): void {
  const b = state.banner;
  bannerBox.className = "banner";
  if (b.kind === "none") {
    bannerBox.textContent = "";
    bannerBox.classList.add("hidden");
    return;
  }
  bannerBox.classList.remove("hidden");
  if (b.kind === "outcome") {
    bannerBox.classList.add(`tone-${b.tone}`);
    bannerBox.textContent = b.text;
  } else if (b.kind === "parse-error") {
    bannerBox.classList.add("tone-bad");
    bannerBox.textContent = "";
    const msg = document.createElement("div");
    msg.textContent = b.message;
    const pre = document.createElement("pre");
    pre.textContent = `${b.line}\n${b.caret}`;
    bannerBox.append(msg, pre);
  } else {
    bannerBox.classList.add("tone-bad");
    bannerBox.textContent = b.message;
  }
}

const model = new ExplorerModel(httpTransport(), (state) => {
  renderScene(ctx, state, frame);
  renderBanner(state);
  if (document.activeElement !== x0Input) x0Input.value = state.x0.toPrecision(6);
  kSlider.value = String(state.k);
  if (document.activeElement !== kNumber) kNumber.value = String(state.k);
  basinButton.textContent = state.basinVisible ? "hide basin strip" : "show basin strip";
});

functionInput.addEventListener("change", () => model.setFunction(functionInput.value));
x0Input.addEventListener("change", () => {
  const v = Number(x0Input.value);
  if (Number.isFinite(v)) model.setX0(v);
});
kSlider.addEventListener("input", () => model.setK(Number(kSlider.value)));
kNumber.addEventListener("change", () => model.setK(Number(kNumber.value)));
basinButton.addEventListener("click", () => model.toggleBasin());

let dragging = false;

canvas.addEventListener("pointerdown", (ev) => {
  const rect = canvas.getBoundingClientRect();
  const px = ((ev.clientX - rect.left) / rect.width) * frame.width;
  const py = ((ev.clientY - rect.top) / rect.height) * frame.height;
  if (isOnHandle(model.state.viewport, frame, model.state.x0, px, py)) {
    dragging = true;
    canvas.setPointerCapture(ev.pointerId);
  } else if (model.state.basinVisible && isOnBasinStrip(frame, py)) {
    model.clickBasin(pxToWorldX(model.state.viewport, frame, px));
  }
});

canvas.addEventListener("pointermove", (ev) => {
  if (!dragging) return;
  const rect = canvas.getBoundingClientRect();
  const px = ((ev.clientX - rect.left) / rect.width) * frame.width;
  const world = clampToViewportX(model.state.viewport, pxToWorldX(model.state.viewport, frame, px));
  model.setX0(world);
});

canvas.addEventListener("pointerup", (ev) => {
  if (dragging) {
    dragging = false;
    canvas.releasePointerCapture(ev.pointerId);
  }
});

functionInput.value = model.state.functionText;
model.start();
