import init, { kernel_table, potential, responses } from "./pkg/bathpair_wasm_demo.js";

const COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e"];
const PARAMS = {
  drude: ["gamma", "omega_d"],
  exponential_cutoff: ["amplitude", "cutoff"],
  ohmic: ["gamma", "(unused)"],
};

const $ = (id) => document.getElementById(id);
const num = (id) => parseFloat($(id).value);

function plot(id, data, xKey, keys) {
  const canvas = $(id);
  const ctx = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  ctx.clearRect(0, 0, w, h);
  const xs = data[xKey];
  const ys = keys.flatMap((k) => data[k]);
  const [x0, x1] = [Math.min(...xs), Math.max(...xs)];
  let [y0, y1] = [Math.min(...ys), Math.max(...ys)];
  if (y1 - y0 < 1e-300) { y0 -= 1; y1 += 1; }
  const pad = 30;
  const sx = (x) => pad + ((x - x0) / (x1 - x0)) * (w - 2 * pad);
  const sy = (y) => h - pad - ((y - y0) / (y1 - y0)) * (h - 2 * pad);

  ctx.strokeStyle = "#aaa";
  ctx.beginPath();
  ctx.moveTo(pad, sy(Math.min(Math.max(0, y0), y1)));
  ctx.lineTo(w - pad, sy(Math.min(Math.max(0, y0), y1)));
  ctx.stroke();
  ctx.fillStyle = "#555";
  ctx.fillText(y1.toPrecision(3), 2, pad - 4);
  ctx.fillText(y0.toPrecision(3), 2, h - pad + 12);
  ctx.fillText(x0.toPrecision(3), pad, h - 8);
  ctx.fillText(x1.toPrecision(3), w - pad - 30, h - 8);

  keys.forEach((k, i) => {
    ctx.strokeStyle = COLORS[i % COLORS.length];
    ctx.beginPath();
    data[k].forEach((y, j) => (j ? ctx.lineTo(sx(xs[j]), sy(y)) : ctx.moveTo(sx(xs[j]), sy(y))));
    ctx.stroke();
  });
  $(`${id}-legend`).innerHTML = keys
    .map((k, i) => `<span style="color:${COLORS[i % COLORS.length]}">${k}</span>`)
    .join("");
}

function message(id, text) {
  const ctx = $(id).getContext("2d");
  ctx.clearRect(0, 0, ctx.canvas.width, ctx.canvas.height);
  ctx.fillStyle = "#555";
  ctx.fillText(text, 40, 40);
  $(`${id}-legend`).textContent = "";
}

function update() {
  const family = $("family").value;
  const [pName, qName] = PARAMS[family];
  $("p-name").textContent = pName;
  $("q-name").textContent = qName;
  const [p, q, u0, omega0, d] = [num("p"), num("q"), num("u0"), num("omega0"), num("d")];
  $("error").textContent = "";
  try {
    if (family === "ohmic") {
      message("kernels", "Ohmic kernels are delta functions at lag 0 and d/u0");
      message("potential", "the Ohmic induced potential diverges");
    } else {
      plot("kernels", JSON.parse(kernel_table(family, p, q, u0, d, 2 * (d / u0) + 2, 400)), "t", ["chi", "chi_d", "chi_R", "chi_Z"]);
      plot("potential", JSON.parse(potential(family, p, q, u0, d, d - 6, d + 6, 400)), "u12", ["V", "F"]);
    }
    const h = family === "ohmic" ? Math.min(0.02, d / u0 / 10 || 0.02) : 0.05;
    plot("responses", JSON.parse(responses(family, p, q, u0, omega0, d, h, 40)), "t", ["eta_plus", "eta_minus", "xi_plus", "xi_minus"]);
  } catch (e) {
    $("error").textContent = String(e.message ?? e);
  }
}

await init();
for (const id of ["family", "p", "q", "u0", "omega0", "d"]) {
  $(id).addEventListener("change", update);
}
$("family").addEventListener("change", () => {
  const defaults = { drude: [0.1, 10], exponential_cutoff: [0.05, 1], ohmic: [0.1, 0] };
  [$("p").value, $("q").value] = defaults[$("family").value];
  update();
});
update();
