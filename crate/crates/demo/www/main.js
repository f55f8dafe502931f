import init, { responseCurve, csbmSpectrum, positivityCheck } from "./pkg/gscnet_demo.js";

const $ = (id) => document.getElementById(id);

function parseList(text) {
  return Float64Array.from(
    text.split(",").map((s) => s.trim()).filter((s) => s.length > 0).map(Number)
  );
}

function axes(ctx, w, h, pad, xmax, ymin, ymax) {
  ctx.clearRect(0, 0, w, h);
  ctx.strokeStyle = "#999";
  ctx.beginPath();
  ctx.moveTo(pad, pad);
  ctx.lineTo(pad, h - pad);
  ctx.lineTo(w - pad, h - pad);
  ctx.stroke();
  ctx.fillStyle = "#555";
  ctx.fillText("0", pad - 4, h - pad + 14);
  ctx.fillText(String(xmax), w - pad - 6, h - pad + 14);
  ctx.fillText(ymax.toPrecision(3), 2, pad + 4);
  ctx.fillText(ymin.toPrecision(3), 2, h - pad);
  return {
    x: (v) => pad + (v / xmax) * (w - 2 * pad),
    y: (v) => h - pad - ((v - ymin) / (ymax - ymin || 1)) * (h - 2 * pad),
  };
}

function polyline(ctx, xs, ys, map, color) {
  ctx.strokeStyle = color;
  ctx.beginPath();
  xs.forEach((x, i) => (i ? ctx.lineTo : ctx.moveTo).call(ctx, map.x(x), map.y(ys[i])));
  ctx.stroke();
}

function drawResponse() {
  const out = $("response-readout");
  try {
    const r = JSON.parse(responseCurve(parseList($("alpha").value), parseList($("beta").value), 201));
    const c = $("response-plot");
    const ctx = c.getContext("2d");
    const all = [...r.total, ...r.positive, ...r.negative];
    const map = axes(ctx, c.width, c.height, 30, 2, Math.min(0, ...all), Math.max(...all));
    polyline(ctx, r.lambda, r.positive, map, "#1a7f37");
    polyline(ctx, r.lambda, r.negative, map, "#b42318");
    polyline(ctx, r.lambda, r.total, map, "#222");
    out.textContent = `h(0) = ${r.total[0].toPrecision(4)}   h(1) = ${r.total[100].toPrecision(4)}   h(2) = ${r.total[200].toPrecision(4)}`
      + "\nblack: total, green: positive half, red: negative half";
  } catch (e) {
    out.textContent = String(e);
  }
}

function drawSpectrum() {
  const out = $("spectrum-readout");
  try {
    const s = JSON.parse(csbmSpectrum(
      Number($("csbm-n").value), Number($("csbm-deg").value),
      Number($("csbm-ratio").value), Number($("csbm-seed").value)));
    const c = $("spectrum-plot");
    const ctx = c.getContext("2d");
    const bins = 40;
    const energy = new Float64Array(bins);
    s.eigenvalues.forEach((l, k) => {
      energy[Math.min(bins - 1, Math.max(0, Math.floor((l / 2) * bins)))] += s.label_energy[k];
    });
    const map = axes(ctx, c.width, c.height, 30, 2, 0, Math.max(...energy));
    ctx.fillStyle = "#3b6fb6";
    energy.forEach((e, b) => {
      const x0 = map.x((2 * b) / bins), x1 = map.x((2 * (b + 1)) / bins);
      ctx.fillRect(x0, map.y(e), x1 - x0 - 1, map.y(0) - map.y(e));
    });
    ctx.fillStyle = "#222";
    s.eigenvalues.forEach((l) => ctx.fillRect(map.x(l), c.height - 30, 1, 6));
    out.textContent = `edges ${s.edges}   label smoothness ${s.label_smoothness.toFixed(4)}`
      + `   label Rayleigh quotient ${s.label_rayleigh.toFixed(4)}`
      + "\nbars: share of label-signal energy per eigenvalue bin; ticks: eigenvalues";
  } catch (e) {
    out.textContent = String(e);
  }
}

function drawPositivity() {
  const out = $("positivity-readout");
  try {
    const r = JSON.parse(positivityCheck(
      parseList($("pos-alpha").value), Number($("pos-n").value),
      Number($("pos-p").value), Number($("pos-seed").value)));
    const c = $("graph-plot");
    const ctx = c.getContext("2d");
    ctx.clearRect(0, 0, c.width, c.height);
    const R = c.width / 2 - 30;
    const pos = Array.from({ length: r.n }, (_, i) => [
      c.width / 2 + R * Math.cos((2 * Math.PI * i) / r.n),
      c.height / 2 + R * Math.sin((2 * Math.PI * i) / r.n),
    ]);
    const w = r.class.witness;
    ctx.strokeStyle = "#888";
    r.edges.forEach(([u, v]) => {
      ctx.beginPath();
      ctx.moveTo(...pos[u]);
      ctx.lineTo(...pos[v]);
      ctx.stroke();
    });
    if (w && w.kind === "entry") {
      ctx.strokeStyle = "#b42318";
      ctx.lineWidth = 3;
      ctx.beginPath();
      ctx.moveTo(...pos[w.row]);
      ctx.lineTo(...pos[w.col]);
      ctx.stroke();
      ctx.lineWidth = 1;
    }
    pos.forEach(([x, y], i) => {
      ctx.fillStyle = "#3b6fb6";
      ctx.beginPath();
      ctx.arc(x, y, 6, 0, 2 * Math.PI);
      ctx.fill();
      ctx.fillStyle = "#222";
      ctx.fillText(String(i), x + 8, y - 8);
    });
    const positive = r.class.class === "positive";
    out.innerHTML = `<span class="${positive ? "pos" : "neg"}">${positive ? "positive" : "negative"}</span>`
      + (w ? `   witness ${JSON.stringify(w)}` : "")
      + `\nsmallest edge/diagonal weight of 2I − L: ${r.min_edge_weight.toFixed(4)}`;
  } catch (e) {
    out.textContent = String(e);
  }
}

await init();
for (const [ids, draw] of [
  [["alpha", "beta"], drawResponse],
  [["csbm-n", "csbm-deg", "csbm-ratio", "csbm-seed"], drawSpectrum],
  [["pos-alpha", "pos-n", "pos-p", "pos-seed"], drawPositivity],
]) {
  ids.forEach((id) => $(id).addEventListener("input", draw));
  draw();
}
