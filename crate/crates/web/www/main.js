import init, { drawSample, fitDensity, riskCurve, penaltySweep } from "./pkg/lpocv_web.js";

const $ = (id) => document.getElementById(id);
let sample = new Float64Array();

function axes(ctx, w, h, pad, xr, yr) {
  ctx.clearRect(0, 0, w, h);
  ctx.strokeStyle = "#999";
  ctx.beginPath();
  ctx.moveTo(pad, pad);
  ctx.lineTo(pad, h - pad);
  ctx.lineTo(w - pad, h - pad);
  ctx.stroke();
  ctx.fillStyle = "#555";
  ctx.font = "11px sans-serif";
  ctx.fillText(yr[1].toPrecision(3), 2, pad + 4);
  ctx.fillText(yr[0].toPrecision(3), 2, h - pad);
  ctx.fillText(xr[0].toPrecision(3), pad, h - 4);
  ctx.fillText(xr[1].toPrecision(3), w - pad - 30, h - 4);
  const sx = (x) => pad + ((x - xr[0]) / (xr[1] - xr[0] || 1)) * (w - 2 * pad);
  const sy = (y) => h - pad - ((y - yr[0]) / (yr[1] - yr[0] || 1)) * (h - 2 * pad);
  return [sx, sy];
}

function line(ctx, xs, ys, sx, sy, color) {
  ctx.strokeStyle = color;
  ctx.beginPath();
  xs.forEach((x, i) => (i ? ctx.lineTo(sx(x), sy(ys[i])) : ctx.moveTo(sx(x), sy(ys[i]))));
  ctx.stroke();
}

function range(vs) {
  let lo = Math.min(...vs), hi = Math.max(...vs);
  if (lo === hi) { lo -= 0.5; hi += 0.5; }
  return [lo, hi];
}

function drawFit() {
  const kind = $("kind").value, size = +$("size").value;
  const grid = fitDensity(sample, kind, size, 801);
  const xs = [], ys = [];
  for (let i = 0; i < grid.length; i += 2) { xs.push(grid[i]); ys.push(grid[i + 1]); }
  const c = $("fit"), ctx = c.getContext("2d");
  // histogram of the data on 50 bins, as a backdrop
  const bins = new Array(50).fill(0);
  sample.forEach((v) => bins[Math.min(49, Math.floor(v * 50))]++);
  const dens = bins.map((b) => (b * 50) / sample.length);
  const yr = [Math.min(0, ...ys), Math.max(...ys, ...dens) * 1.05];
  const [sx, sy] = axes(ctx, c.width, c.height, 28, [0, 1], yr);
  ctx.fillStyle = "#dde6f3";
  dens.forEach((d, i) => {
    const x0 = sx(i / 50), x1 = sx((i + 1) / 50);
    ctx.fillRect(x0, sy(d), x1 - x0 - 1, sy(0) - sy(d));
  });
  line(ctx, xs, ys, sx, sy, "#c33");
}

function drawCurve() {
  const out = JSON.parse(riskCurve(sample, $("collection").value, +$("phi").value, +$("p").value));
  $("chosen").textContent = `p = ${out.p}, chosen ${typeof out.chosen_model === "string" ? out.chosen_model : JSON.stringify(out.chosen_model)} (dimension ${out.dims[out.chosen]})`;
  const c = $("curve"), ctx = c.getContext("2d");
  const [sx, sy] = axes(ctx, c.width, c.height, 28, range(out.dims), range(out.risks));
  line(ctx, out.dims, out.risks, sx, sy, "#236");
  ctx.fillStyle = "#c33";
  ctx.beginPath();
  ctx.arc(sx(out.dims[out.chosen]), sy(out.risks[out.chosen]), 4, 0, 2 * Math.PI);
  ctx.fill();
}

function drawPenalty() {
  const out = JSON.parse(penaltySweep(sample, $("kind").value, +$("size").value));
  const ps = out.penalty.map((_, i) => i + 1);
  const ideal = out.c_over.map((c) => out.penalty[0] / out.c_over[0] * c);
  $("peninfo").textContent =
    `pen_p (blue) against C_over(p) scaled to match at p = 1 (grey)` +
    (out.log_factor_p ? `; C_over = ln n near p = ${out.log_factor_p}` : "");
  const c = $("penalty"), ctx = c.getContext("2d");
  const yr = range(out.penalty.concat(ideal).filter((v) => isFinite(v)).slice(0, Math.max(2, out.n - 2)));
  const [sx, sy] = axes(ctx, c.width, c.height, 28, [1, out.n - 1], yr);
  line(ctx, ps, ideal, sx, sy, "#aaa");
  line(ctx, ps, out.penalty, sx, sy, "#236");
}

function refresh(which) {
  $("error").textContent = "";
  try {
    if (which.includes("fit")) drawFit();
    if (which.includes("curve")) drawCurve();
    if (which.includes("penalty")) drawPenalty();
  } catch (e) {
    $("error").textContent = String(e.message || e);
  }
}

function newSample() {
  try {
    sample = drawSample($("density").value, +$("n").value, +$("seed").value);
    $("info").textContent = `${sample.length} points`;
    refresh(["fit", "curve", "penalty"]);
  } catch (e) {
    $("error").textContent = String(e.message || e);
  }
}

await init();
$("draw").onclick = newSample;
$("size").oninput = () => { $("sizeval").textContent = $("size").value; refresh(["fit", "penalty"]); };
$("kind").onchange = () => refresh(["fit", "penalty"]);
for (const id of ["collection", "phi", "p"]) $(id).onchange = () => refresh(["curve"]);
newSample();
