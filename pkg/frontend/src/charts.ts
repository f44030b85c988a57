// Hand-rolled SVG charts.  Each slice, point and legend row carries
// data-label/data-value attributes holding the untouched payload numbers.

import { el, svgEl } from "./dom";

export interface PieSlice {
  label: string;
  value: number;
  color: string;
  display?: string;
}

export interface SeriesPoint {
  x: number;
  y: number;
  commit: string;
}

export interface Series {
  name: string;
  color: string;
  points: SeriesPoint[];
}

function polar(cx: number, cy: number, r: number, angle: number):
    [number, number] {
  return [cx + r * Math.cos(angle), cy + r * Math.sin(angle)];
}

function legendFor(slices: PieSlice[]): HTMLElement {
  const list = el("ul", { class: "legend" });
  for (const slice of slices) {
    list.append(el(
      "li",
      { class: "legend-row", "data-label": slice.label },
      el("span", {
        class: "swatch",
        style: `background:${slice.color}`,
      }),
      el("span", { class: "legend-name" }, slice.display ?? slice.label),
      el("span", {
        class: "legend-value",
        "data-label": slice.label,
        "data-value": String(slice.value),
      }, String(slice.value)),
    ));
  }
  return list;
}

export function pieChart(title: string, slices: PieSlice[]): HTMLElement {
  const chart = el("figure", { class: "chart pie-chart" },
    el("figcaption", {}, title));
  const total = slices.reduce((sum, s) => sum + s.value, 0);
  if (total === 0) {
    chart.append(el("div", { class: "empty-state" },
      "no classified items yet"));
    chart.append(legendFor(slices));
    return chart;
  }
  const svg = svgEl("svg", {
    viewBox: "0 0 120 120",
    class: "pie",
    role: "img",
    "aria-label": title,
  });
  const cx = 60, cy = 60, r = 54;
  const nonZero = slices.filter((s) => s.value > 0);
  if (nonZero.length === 1) {
    // A single segment is the whole disc; two coincident arc points would
    // collapse to nothing.
    const s = nonZero[0];
    svg.append(svgEl("circle", {
      cx: String(cx), cy: String(cy), r: String(r),
      fill: s.color,
      class: "slice",
      "data-label": s.label,
      "data-value": String(s.value),
    }));
  } else {
    let angle = -Math.PI / 2;
    for (const s of nonZero) {
      const sweep = (s.value / total) * 2 * Math.PI;
      const [x0, y0] = polar(cx, cy, r, angle);
      const [x1, y1] = polar(cx, cy, r, angle + sweep);
      const large = sweep > Math.PI ? 1 : 0;
      svg.append(svgEl("path", {
        d: `M ${cx} ${cy} L ${x0.toFixed(3)} ${y0.toFixed(3)} ` +
           `A ${r} ${r} 0 ${large} 1 ${x1.toFixed(3)} ${y1.toFixed(3)} Z`,
        fill: s.color,
        class: "slice",
        "data-label": s.label,
        "data-value": String(s.value),
      }));
      angle += sweep;
    }
  }
  chart.append(svg, legendFor(slices));
  return chart;
}

export function lineChart(title: string, series: Series[]): HTMLElement {
  const chart = el("figure", { class: "chart line-chart" },
    el("figcaption", {}, title));
  const allPoints = series.flatMap((s) => s.points);
  if (allPoints.length === 0) {
    chart.append(el("div", { class: "empty-state" }, "no snapshots yet"));
    return chart;
  }
  const width = 420, height = 170;
  const pad = { left: 36, right: 12, top: 10, bottom: 22 };
  const xs = allPoints.map((p) => p.x);
  const xMin = Math.min(...xs), xMax = Math.max(...xs);
  const yMax = Math.max(1, ...allPoints.map((p) => p.y));
  const plotW = width - pad.left - pad.right;
  const plotH = height - pad.top - pad.bottom;
  const xPos = (x: number) => xMax === xMin
    ? pad.left + plotW / 2
    : pad.left + ((x - xMin) / (xMax - xMin)) * plotW;
  const yPos = (y: number) => pad.top + plotH - (y / yMax) * plotH;

  const svg = svgEl("svg", {
    viewBox: `0 0 ${width} ${height}`,
    class: "line",
    role: "img",
    "aria-label": title,
  });
  svg.append(svgEl("line", {
    x1: String(pad.left), y1: String(pad.top + plotH),
    x2: String(width - pad.right), y2: String(pad.top + plotH),
    class: "axis",
  }));
  svg.append(svgEl("line", {
    x1: String(pad.left), y1: String(pad.top),
    x2: String(pad.left), y2: String(pad.top + plotH),
    class: "axis",
  }));
  const yTop = svgEl("text", {
    x: String(pad.left - 4), y: String(pad.top + 4),
    class: "axis-label", "text-anchor": "end",
  });
  yTop.textContent = String(yMax);
  svg.append(yTop);

  for (const s of series) {
    const sorted = [...s.points].sort((a, b) => a.x - b.x);
    if (sorted.length > 1) {
      svg.append(svgEl("polyline", {
        points: sorted.map((p) =>
          `${xPos(p.x).toFixed(2)},${yPos(p.y).toFixed(2)}`).join(" "),
        fill: "none",
        stroke: s.color,
        class: "series-line",
        "data-series": s.name,
      }));
    }
    for (const p of sorted) {
      svg.append(svgEl("circle", {
        cx: xPos(p.x).toFixed(2),
        cy: yPos(p.y).toFixed(2),
        r: "3",
        fill: s.color,
        class: "series-point",
        "data-series": s.name,
        "data-commit": p.commit,
        "data-timestamp": String(p.x),
        "data-value": String(p.y),
      }));
    }
  }

  const dates = el("div", { class: "axis-dates" },
    el("span", {}, formatDate(xMin)),
    el("span", {}, xMax === xMin ? "" : formatDate(xMax)));
  const legend = el("ul", { class: "legend" });
  for (const s of series) {
    legend.append(el("li", { class: "legend-row", "data-series": s.name },
      el("span", { class: "swatch", style: `background:${s.color}` }),
      el("span", { class: "legend-name" }, s.name)));
  }
  chart.append(svg, dates, legend);
  return chart;
}

export function formatDate(epochSeconds: number): string {
  return new Date(epochSeconds * 1000).toISOString().slice(0, 10);
}
