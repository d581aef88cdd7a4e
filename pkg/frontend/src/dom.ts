/**
 * Browser binding: implements ViewerView with real elements and routes DOM
 * events back into the controller. Kept as thin as possible; everything
 * with behaviour worth testing lives in the controller and the render
 * models.
 */

import { paintHeatmap, type Canvas2D } from "./paint.js";
import { buildSurface } from "./surface.js";
import { paintSurface } from "./paint.js";
import type { HeatmapModel } from "./heatmap.js";
import type { SliceViewer, SliderInfo, ViewerView } from "./controller.js";
import type { RunSummary } from "./types.js";

interface Elements {
  runSelect: HTMLSelectElement;
  axisASelect: HTMLSelectElement;
  axisBSelect: HTMLSelectElement;
  sliderBox: HTMLElement;
  overlayToggle: HTMLInputElement;
  surfaceToggle: HTMLInputElement;
  canvas: HTMLCanvasElement;
  message: HTMLElement;
  followupForm: HTMLFormElement;
  followupAxes: HTMLElement;
  legend: HTMLElement;
}

function grab(doc: Document): Elements {
  const byId = <T extends HTMLElement>(id: string) => doc.getElementById(id) as T;
  return {
    runSelect: byId("run-select"),
    axisASelect: byId("axis-a"),
    axisBSelect: byId("axis-b"),
    sliderBox: byId("sliders"),
    overlayToggle: byId("overlay-toggle"),
    surfaceToggle: byId("surface-toggle"),
    canvas: byId("slice-canvas"),
    message: byId("message"),
    followupForm: byId("followup-form"),
    followupAxes: byId("followup-axes"),
    legend: byId("legend"),
  };
}

export function bindViewer(doc: Document, attach: (view: ViewerView) => SliceViewer): SliceViewer {
  const el = grab(doc);
  let lastModel: HeatmapModel | null = null;
  let controller: SliceViewer;

  const paint = () => {
    if (lastModel === null) return;
    const ctx = el.canvas.getContext("2d") as unknown as Canvas2D;
    if (el.surfaceToggle.checked) {
      paintSurface(ctx, buildSurface(lastModel), el.canvas.width, el.canvas.height);
    } else {
      paintHeatmap(ctx, lastModel, el.canvas.width, el.canvas.height);
    }
    renderLegend(el.legend, lastModel);
  };

  const view: ViewerView = {
    showRuns(runs: RunSummary[], selected: string | null): void {
      el.runSelect.innerHTML = "";
      for (const run of runs) {
        const opt = doc.createElement("option");
        opt.value = run.id;
        opt.textContent = `${run.id} (${run.status}, ${run.grid_counts.join("x")})`;
        opt.selected = run.id === selected;
        el.runSelect.appendChild(opt);
      }
    },

    showAxes(names: string[], axes: [string, string]): void {
      for (const [select, chosen] of [
        [el.axisASelect, axes[0]],
        [el.axisBSelect, axes[1]],
      ] as const) {
        select.innerHTML = "";
        for (const name of names) {
          const opt = doc.createElement("option");
          opt.value = name;
          opt.textContent = name;
          opt.selected = name === chosen;
          select.appendChild(opt);
        }
      }
      renderFollowupAxes(doc, el.followupAxes, controller);
    },

    showSliders(sliders: SliderInfo[]): void {
      el.sliderBox.innerHTML = "";
      for (const s of sliders) {
        const row = doc.createElement("label");
        row.className = "slider-row";
        const text = doc.createElement("span");
        text.textContent = `${s.axis} = ${s.value}`;
        const input = doc.createElement("input");
        input.type = "range";
        input.min = "0";
        input.max = String(s.count - 1);
        input.step = "1";
        input.value = String(s.index);
        input.addEventListener("input", () => {
          void controller.moveSlider(s.axis, Number(input.value));
        });
        row.appendChild(text);
        row.appendChild(input);
        el.sliderBox.appendChild(row);
      }
    },

    showSlice(model: HeatmapModel): void {
      lastModel = model;
      paint();
    },

    showMessage(message: string | null): void {
      el.message.textContent = message ?? "";
    },

    showUrl(query: string): void {
      // keep a ?api=... override in the shareable URL
      const api = new URLSearchParams(location.search).get("api");
      const params = new URLSearchParams(query);
      if (api) params.set("api", api);
      history.replaceState(null, "", `?${params.toString()}`);
    },
  };

  controller = attach(view);

  el.runSelect.addEventListener("change", () => {
    void controller.selectRun(el.runSelect.value);
  });
  const onAxisChange = () => {
    if (el.axisASelect.value !== el.axisBSelect.value) {
      void controller.setAxes(el.axisASelect.value, el.axisBSelect.value);
    }
  };
  el.axisASelect.addEventListener("change", onAxisChange);
  el.axisBSelect.addEventListener("change", onAxisChange);
  el.overlayToggle.addEventListener("change", () => controller.toggleOverlay());
  el.surfaceToggle.addEventListener("change", paint);

  el.followupForm.addEventListener("submit", (event) => {
    event.preventDefault();
    const data = new FormData(el.followupForm);
    const selection: Record<string, [number, number]> = {};
    for (const axis of controller.detail?.config.axes ?? []) {
      const lo = data.get(`sel-${axis.name}-lo`);
      const hi = data.get(`sel-${axis.name}-hi`);
      if (lo !== null && hi !== null) selection[axis.name] = [Number(lo), Number(hi)];
    }
    const tol = Number(data.get("tol"));
    const fraction = Number(data.get("fraction"));
    controller
      .launchFollowup(selection, {
        seed: Math.floor(Math.random() * 1_000_000),
        tol: Number.isFinite(tol) ? tol : undefined,
        fraction: Number.isFinite(fraction) && fraction > 0 ? fraction : undefined,
      })
      .catch(() => {
        /* the controller already surfaced the reason */
      });
  });

  return controller;
}

function renderFollowupAxes(doc: Document, box: HTMLElement, controller: SliceViewer): void {
  box.innerHTML = "";
  const axes = controller.detail?.config.axes ?? [];
  axes.forEach((axis, a) => {
    const count = controller.counts[a];
    const row = doc.createElement("div");
    row.className = "followup-axis";
    const label = doc.createElement("span");
    label.textContent = `${axis.name} index range`;
    const lo = doc.createElement("input");
    lo.type = "number";
    lo.name = `sel-${axis.name}-lo`;
    lo.min = "0";
    lo.max = String(count - 1);
    lo.value = "0";
    const hi = doc.createElement("input");
    hi.type = "number";
    hi.name = `sel-${axis.name}-hi`;
    hi.min = "0";
    hi.max = String(count - 1);
    hi.value = String(count - 1);
    row.append(label, lo, hi);
    box.appendChild(row);
  });
}

function renderLegend(box: HTMLElement, model: HeatmapModel): void {
  if (model.bounds === null) {
    box.textContent = "no values";
    return;
  }
  const fixed = Object.entries(model.fixed)
    .map(([k, v]) => `${k} = ${v}`)
    .join(", ");
  box.textContent =
    `${model.axes[0]} vs ${model.axes[1]}` +
    (fixed ? ` at ${fixed}` : "") +
    ` | range ${model.bounds.lo} to ${model.bounds.hi}`;
}
