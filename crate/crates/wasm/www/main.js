import init, { Workbench } from "./pkg/tempo_wasm.js";

const $ = (id) => document.getElementById(id);
let bench;

function guard(f) {
  return (...args) => {
    $("error").textContent = "";
    try {
      f(...args);
      redraw();
    } catch (e) {
      $("error").textContent = e.message ?? String(e);
    }
  };
}

function redraw() {
  $("plot").innerHTML = bench.svg();
  $("status").textContent =
    `${bench.activeCount()} of ${bench.runCount()} runs active, k = ${bench.k()}; selection ${bench.selectionJson()}`;
  const axis = $("axis");
  const current = axis.value;
  axis.replaceChildren(...bench.axes().map((a) => new Option(a, a)));
  if (current) axis.value = current;
}

function buildBrushes() {
  const box = $("brushes");
  box.replaceChildren();
  for (const p of bench.parameters()) {
    const [min, max] = bench.parameterRange(p);
    const lo = Object.assign(document.createElement("input"), { type: "number", value: min, step: "any" });
    const hi = Object.assign(document.createElement("input"), { type: "number", value: max, step: "any" });
    const on = Object.assign(document.createElement("input"), { type: "checkbox" });
    const apply = guard(() => {
      if (on.checked) bench.brush(p, Number(lo.value), Number(hi.value));
      else bench.clearBrush(p);
    });
    for (const el of [lo, hi, on]) el.addEventListener("change", apply);
    const label = Object.assign(document.createElement("span"), { textContent: p });
    box.append(label, lo, hi, on);
  }
}

async function main() {
  await init();
  bench = new Workbench(42n, 3);
  buildBrushes();
  $("left").onclick = guard(() => bench.moveAxis($("axis").value, -1));
  $("right").onclick = guard(() => bench.moveAxis($("axis").value, 1));
  $("recluster").onclick = guard(() => bench.recluster(Number($("k").value)));
  $("clear").onclick = guard(() => {
    bench.clearSelection();
    buildBrushes();
  });
  $("plot").addEventListener("click", (ev) => {
    const rect = ev.target.closest("rect.cluster-box");
    if (!rect) return;
    guard(() => bench.pickCluster(rect.dataset.axis, Number(rect.dataset.cluster), !ev.shiftKey))();
  });
  redraw();
}

main().catch((e) => {
  $("error").textContent = e.message ?? String(e);
});
