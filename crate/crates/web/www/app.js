import init, { braggTransfer, pairTable, momentComparison } from "./pkg/fiberq_web.js";

const $ = (id) => document.getElementById(id);
const num = (id) => parseFloat($(id).value);
const knobs = () => [num("gamma"), num("power"), num("alpha"), num("ri"), num("length")];

function status(text, error = false) {
  $("status").textContent = text;
  $("status").className = error ? "err" : "";
}

// Draws series sharing one x axis; y range covers all series.
function lines(canvas, xs, series) {
  const ctx = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  const pad = 40;
  ctx.clearRect(0, 0, w, h);
  const all = series.flatMap((s) => Array.from(s.ys));
  const lo = Math.min(0, ...all), hi = Math.max(...all) || 1;
  const xmax = xs[xs.length - 1] || 1;
  const px = (x) => pad + (x / xmax) * (w - 2 * pad);
  const py = (y) => h - pad - ((y - lo) / (hi - lo)) * (h - 2 * pad);
  ctx.strokeStyle = "#999";
  ctx.strokeRect(pad, pad, w - 2 * pad, h - 2 * pad);
  ctx.fillStyle = "#444";
  ctx.fillText(hi.toPrecision(3), 2, pad + 4);
  ctx.fillText(lo.toPrecision(3), 2, h - pad);
  ctx.fillText(`z = ${xmax} km`, w - pad - 50, h - pad + 16);
  for (const s of series) {
    ctx.strokeStyle = s.color;
    ctx.setLineDash(s.dash || []);
    ctx.beginPath();
    xs.forEach((x, i) => (i ? ctx.lineTo(px(x), py(s.ys[i])) : ctx.moveTo(px(x), py(s.ys[i]))));
    ctx.stroke();
  }
  ctx.setLineDash([]);
}

function heatmap(canvas, size, probs) {
  const ctx = canvas.getContext("2d");
  const pad = 30, cell = (canvas.width - pad) / size;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  const max = Math.max(...probs);
  ctx.font = "10px system-ui";
  for (let s = 0; s < size; s++) {
    for (let i = 0; i < size; i++) {
      const p = probs[s * size + i];
      const shade = Math.round(255 * (1 - Math.sqrt(Math.max(p, 0) / max)));
      ctx.fillStyle = `rgb(${shade},${shade},255)`;
      ctx.fillRect(pad + i * cell, s * cell, cell - 1, cell - 1);
      ctx.fillStyle = shade < 120 ? "#fff" : "#000";
      ctx.fillText(p.toExponential(1), pad + i * cell + 3, s * cell + cell / 2);
    }
    ctx.fillStyle = "#000";
    ctx.fillText(String(s), 10, s * cell + cell / 2);
    ctx.fillText(String(s), pad + s * cell + cell / 2, canvas.height - 4);
  }
}

function timed(label, f) {
  status(`${label}…`);
  // Let the status repaint before the blocking call.
  setTimeout(() => {
    const t = performance.now();
    try {
      f();
      status(`${label}: ${((performance.now() - t) / 1000).toFixed(2)} s`);
    } catch (e) {
      status(String(e.message || e), true);
    }
  }, 10);
}

function runBragg() {
  timed("Bragg scattering", () => {
    const out = braggTransfer(...knobs(), 201);
    const n = out.length / 4;
    const part = (k) => out.subarray(k * n, (k + 1) * n);
    lines($("bragg"), part(0), [
      { ys: part(1), color: "#1f77b4" },
      { ys: part(2), color: "#d62728" },
      { ys: part(3), color: "#7f7f7f" },
    ]);
  });
}

function runPairs() {
  timed("pair generation", () => {
    const out = pairTable(...knobs(), parseInt($("nmax").value, 10));
    const size = out[0];
    heatmap($("pairs"), size, out.subarray(1, 1 + size * size));
    const [c, m, f] = out.subarray(1 + size * size);
    $("metrics").textContent =
      `coincidence ${c.toExponential(3)}, number mismatch ${m.toExponential(3)}, false herald ${f.toExponential(3)} (rows n_s, columns n_i)`;
  });
}

function runMoments() {
  const pairs = document.querySelector('input[name="model"]:checked').value === "pairs";
  timed("moment comparison", () => {
    const out = momentComparison(pairs, ...knobs(), parseInt($("nmax-moments").value, 10), 101);
    const n = out.length / 3;
    const part = (k) => out.subarray(k * n, (k + 1) * n);
    lines($("moments"), part(0), [
      { ys: part(1), color: "#1f77b4" },
      { ys: part(2), color: "#ff7f0e", dash: [6, 4] },
    ]);
  });
}

await init();
status("ready");
$("run-bragg").onclick = runBragg;
$("run-pairs").onclick = runPairs;
$("run-moments").onclick = runMoments;
runBragg();
