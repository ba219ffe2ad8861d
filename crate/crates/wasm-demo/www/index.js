// Build first: wasm-pack build --target web --out-dir www/pkg
import init, { shear_profile, divergence_curve, flow_grid_lines, hodge_split } from "./pkg/sympcalc_wasm.js";

const $ = (id) => document.getElementById(id);

function plot(canvas, xs, ys, opts = {}) {
  const ctx = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  ctx.clearRect(0, 0, w, h);
  const pad = 30;
  const xmin = Math.min(...xs), xmax = Math.max(...xs);
  const ymin = Math.min(0, ...ys), ymax = Math.max(...ys, ymin + 1e-9);
  const sx = (x) => pad + ((x - xmin) / (xmax - xmin || 1)) * (w - 2 * pad);
  const sy = (y) => h - pad - ((y - ymin) / (ymax - ymin)) * (h - 2 * pad);
  ctx.strokeStyle = "#999";
  ctx.strokeRect(pad, pad, w - 2 * pad, h - 2 * pad);
  ctx.fillStyle = "#333";
  ctx.font = "11px sans-serif";
  ctx.fillText(opts.title ?? "", pad, pad - 8);
  ctx.fillText(ymax.toPrecision(3), 2, pad + 4);
  ctx.fillText(ymin.toPrecision(3), 2, h - pad);
  ctx.strokeStyle = "#1f5fbf";
  ctx.beginPath();
  xs.forEach((x, k) => (k ? ctx.lineTo(sx(x), sy(ys[k])) : ctx.moveTo(sx(x), sy(ys[k]))));
  ctx.stroke();
  if (opts.dots) {
    ctx.fillStyle = "#1f5fbf";
    xs.forEach((x, k) => ctx.fillRect(sx(x) - 2, sy(ys[k]) - 2, 4, 4));
  }
}

function drawShear() {
  const fam = $("family").value;
  const i = 2 ** Number($("pow").value);
  $("i-out").textContent = i;
  const h = shear_profile(fam, i, 600);
  plot($("profile"), [...h.keys()].map((k) => (2 * Math.PI * k) / h.length), [...h], { title: `h_${i}(θ₂)` });
  const c = divergence_curve(fam, 12);
  const xs = [], ys = [];
  for (let k = 0; k < c.length; k += 2) { xs.push(Math.log2(c[k])); ys.push(c[k + 1]); }
  plot($("curve"), xs, ys, { title: "Δ̃ against log₂ i", dots: true });
}

function drawFlow() {
  const canvas = $("flow");
  const ctx = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  ctx.clearRect(0, 0, w, h);
  const data = flow_grid_lines(BigInt($("seed").value || 0), Number($("speed").value), Number($("time").value), 16, 128);
  const s = w / (2 * Math.PI);
  ctx.strokeStyle = "rgba(31, 95, 191, 0.7)";
  let k = 0;
  while (k < data.length) {
    const count = data[k++];
    ctx.beginPath();
    for (let m = 0; m < count; m++, k += 2) {
      const x = data[k] * s, y = h - data[k + 1] * s;
      m ? ctx.lineTo(x, y) : ctx.moveTo(x, y);
    }
    ctx.stroke();
  }
}

function drawHodge() {
  const n = 64;
  const out = hodge_split(Number($("c1").value), Number($("c2").value), Number($("amp").value), n);
  $("harm").textContent = `${out[0].toFixed(6)} dθ₁ + ${out[1].toFixed(6)} dθ₂`;
  const f = out.subarray(2);
  const lo = Math.min(...f), hi = Math.max(...f);
  const canvas = $("potential");
  const ctx = canvas.getContext("2d");
  const img = ctx.createImageData(n, n);
  for (let j = 0; j < n; j++) {
    for (let k = 0; k < n; k++) {
      const v = hi > lo ? (f[j * n + k] - lo) / (hi - lo) : 0.5;
      const p = 4 * ((n - 1 - k) * n + j);
      img.data[p] = 255 * v;
      img.data[p + 1] = 80;
      img.data[p + 2] = 255 * (1 - v);
      img.data[p + 3] = 255;
    }
  }
  const tmp = new OffscreenCanvas(n, n);
  tmp.getContext("2d").putImageData(img, 0, 0);
  ctx.imageSmoothingEnabled = false;
  ctx.drawImage(tmp, 0, 0, canvas.width, canvas.height);
}

await init();
for (const id of ["family", "pow"]) $(id).addEventListener("input", drawShear);
for (const id of ["seed", "speed", "time"]) $(id).addEventListener("input", drawFlow);
for (const id of ["c1", "c2", "amp"]) $(id).addEventListener("input", drawHodge);
drawShear();
drawFlow();
drawHodge();
