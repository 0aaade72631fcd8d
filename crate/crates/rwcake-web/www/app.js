// Static front end: no framework, plain canvas drawing over the JSON
// payloads produced by the wasm module. Build the module first:
//   wasm-pack build crates/rwcake-web --target web --out-dir www/pkg
import init, { instance_json, run_json, analyze_json } from "./pkg/rwcake_web.js";

const $ = (id) => document.getElementById(id);
const colors = [
  "#4c78a8", "#f58518", "#54a24b", "#e45756", "#72b7b2", "#b279a2",
  "#ff9da6", "#9d755d", "#bab0ac", "#6b6ecf", "#8ca252", "#bd9e39",
];

let lastInstance = null;
let lastRun = null;

function setError(msg) {
  $("error").textContent = msg || "";
}

function draw() {
  const canvas = $("cake");
  const ctx = canvas.getContext("2d");
  const W = canvas.width, H = canvas.height;
  ctx.clearRect(0, 0, W, H);
  if (!lastInstance) return;
  const inst = lastInstance;
  const n = inst.n;
  const left = 70, right = 20;
  const plotW = W - left - right;
  const allocBand = lastRun ? 90 : 0;
  const rowH = (H - 40 - allocBand) / n;
  ctx.font = "24px system-ui";

  inst.players.forEach((pl, row) => {
    const y0 = 10 + row * rowH;
    const color = colors[(pl.player - 1) % colors.length];
    ctx.fillStyle = "#00000010";
    ctx.fillRect(left, y0, plotW, rowH - 12);
    ctx.fillStyle = color;
    ctx.fillText(`p${pl.player}`, 8, y0 + rowH / 2);
    const maxDensity = Math.max(...pl.segments.map((s) => s.density_f));
    for (const s of pl.segments) {
      const x = left + s.lo_f * plotW;
      const w = Math.max((s.hi_f - s.lo_f) * plotW, 2.5);
      // Perceptual-ish scaling: thin grid segments are far denser than the
      // filler; a quarter-power keeps both visible.
      const a = s.density_f > 0 ? Math.pow(s.density_f / maxDensity, 0.25) : 0;
      ctx.globalAlpha = 0.25 + 0.75 * a;
      ctx.fillRect(x, y0, w, rowH - 12);
    }
    ctx.globalAlpha = 1;
    ctx.fillStyle = "#222";
    for (const pt of pl.points) {
      const x = left + pt.x_f * plotW;
      ctx.beginPath();
      ctx.arc(x, y0 + rowH - 12, 5, 0, 2 * Math.PI);
      ctx.fill();
    }
  });

  if (lastRun) {
    const y0 = H - allocBand - 10;
    ctx.fillStyle = "#222";
    ctx.fillText("allocation", 8, y0 + 40);
    for (const piece of lastRun.allocation) {
      const x = left + piece.lo_f * plotW;
      const w = (piece.hi_f - piece.lo_f) * plotW;
      ctx.fillStyle = colors[(piece.player - 1) % colors.length];
      ctx.fillRect(x, y0, w, allocBand - 20);
      if (!piece.proportional) {
        ctx.strokeStyle = "#b03030";
        ctx.lineWidth = 3;
        for (let hx = x; hx < x + w; hx += 14) {
          ctx.beginPath();
          ctx.moveTo(hx, y0 + allocBand - 20);
          ctx.lineTo(Math.min(hx + 10, x + w), y0);
          ctx.stroke();
        }
      }
      ctx.fillStyle = "#fff";
      if (w > 40) ctx.fillText(`p${piece.player}`, x + w / 2 - 14, y0 + (allocBand - 20) / 2 + 8);
    }
  }
}

function renderRun(run) {
  const rows = run.allocation
    .map(
      (p) => `<tr>
        <td>p${p.player}</td>
        <td><code>[${p.lo}, ${p.hi})</code></td>
        <td><code>${p.value}</code> (&approx; ${p.value_f.toFixed(4)})</td>
        <td class="${p.proportional ? "ok" : "bad"}">${p.proportional ? "&ge; 1/n" : "below 1/n"}</td>
      </tr>`
    )
    .join("");
  $("runout").innerHTML = `
    <table>
      <tr><th>player</th><th>piece</th><th>own value (exact)</th><th>share</th></tr>
      ${rows}
    </table>
    <p>
      <b>${run.protocol}</b>, n = ${run.n}, seed ${run.seed}:
      ${run.counts.cuts} cuts + ${run.counts.evals} evals = <b>${run.counts.total} queries</b> &middot;
      proportional: <span class="${run.proportional ? "ok" : "bad"}">${run.proportional}</span> &middot;
      piece order matches the hidden permutation:
      <span class="${run.phi_equals_pi_inverse ? "ok" : "bad"}">${run.phi_equals_pi_inverse}</span> &middot;
      primitive transcript: ${run.primitive_transcript}
    </p>`;
}

function renderAnalysis(rep) {
  $("analyzeout").innerHTML = `
    <table>
      <tr><th>strategy</th><th>n</th><th>expected cuts (exact)</th><th>expected nodes</th>
          <th>bound log&#8323;(n!) + 1</th><th>certified &ge; bound</th>
          <th>uniform posteriors</th><th>tree nodes</th><th>leaves</th></tr>
      <tr>
        <td>${rep.strategy}</td><td>${rep.n}</td>
        <td><code>${rep.expected_cuts}</code> (&approx; ${rep.expected_cuts_f.toFixed(4)})</td>
        <td><code>${rep.expected_nodes}</code></td>
        <td>${rep.bound_decimal}</td>
        <td class="${rep.meets_bound ? "ok" : "bad"}">${rep.meets_bound}</td>
        <td class="${rep.uniform_posterior_verified ? "ok" : "bad"}">${rep.uniform_posterior_verified}</td>
        <td>${rep.nodes_checked}</td><td>${rep.leaves}</td>
      </tr>
    </table>`;
}

function sample() {
  setError("");
  try {
    lastInstance = JSON.parse(instance_json(Number($("n").value), BigInt($("seed").value)));
    lastRun = null;
    $("runout").innerHTML = "";
    draw();
  } catch (e) {
    setError(String(e));
  }
}

function run() {
  setError("");
  try {
    const payload = JSON.parse(
      run_json($("protocol").value, Number($("n").value), BigInt($("seed").value))
    );
    lastRun = payload;
    lastInstance = payload.instance;
    renderRun(payload);
    draw();
  } catch (e) {
    setError(String(e));
  }
}

function analyze() {
  setError("");
  try {
    renderAnalysis(JSON.parse(analyze_json($("strategy").value, Number($("an").value))));
  } catch (e) {
    setError(String(e));
  }
}

await init();
$("sample").addEventListener("click", sample);
$("run").addEventListener("click", run);
$("analyze").addEventListener("click", analyze);
sample();
