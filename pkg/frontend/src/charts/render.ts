/** SVG chart construction for the two panels. */
import { extent, formatTick, histogram, linePath, scaleLinear, ticks } from "./svg";

const SVG_NS = "http://www.w3.org/2000/svg";
const MARGIN = { top: 12, right: 14, bottom: 34, left: 48 };

export interface CurveSeries {
  label: string;
  color: string;
  xs: number[];
  ys: number[];
  dashed?: boolean;
}

function el<K extends keyof SVGElementTagNameMap>(
  tag: K,
  attrs: Record<string, string | number> = {},
): SVGElementTagNameMap[K] {
  const node = document.createElementNS(SVG_NS, tag);
  for (const [k, v] of Object.entries(attrs)) node.setAttribute(k, String(v));
  return node;
}

function frame(width: number, height: number): {
  svg: SVGSVGElement;
  plot: SVGGElement;
  innerW: number;
  innerH: number;
} {
  const svg = el("svg", {
    viewBox: `0 0 ${width} ${height}`,
    class: "chart",
    role: "img",
  });
  const plot = el("g", { transform: `translate(${MARGIN.left},${MARGIN.top})` });
  svg.appendChild(plot);
  return {
    svg,
    plot,
    innerW: width - MARGIN.left - MARGIN.right,
    innerH: height - MARGIN.top - MARGIN.bottom,
  };
}

function drawAxes(
  plot: SVGGElement,
  sx: ReturnType<typeof scaleLinear>,
  sy: ReturnType<typeof scaleLinear>,
  innerH: number,
  xLabel: string,
  yLabel: string,
): void {
  const [x0, x1] = sx.domain;
  const [y0, y1] = sy.domain;
  const axes = el("g", { class: "axes" });
  axes.appendChild(el("line", { x1: sx(x0), y1: innerH, x2: sx(x1), y2: innerH, class: "axis" }));
  axes.appendChild(el("line", { x1: sx(x0), y1: sy(y0), x2: sx(x0), y2: sy(y1), class: "axis" }));
  for (const t of ticks(x0, x1, 6)) {
    const text = el("text", { x: sx(t), y: innerH + 16, class: "tick", "text-anchor": "middle" });
    text.textContent = formatTick(t);
    axes.appendChild(text);
  }
  for (const t of ticks(y0, y1, 5)) {
    const text = el("text", { x: -6, y: sy(t) + 3, class: "tick", "text-anchor": "end" });
    text.textContent = formatTick(t);
    axes.appendChild(text);
    axes.appendChild(el("line", { x1: sx(x0), y1: sy(t), x2: sx(x1), y2: sy(t), class: "grid" }));
  }
  const xl = el("text", { x: sx((x0 + x1) / 2), y: innerH + 30, class: "label", "text-anchor": "middle" });
  xl.textContent = xLabel;
  axes.appendChild(xl);
  const yl = el("text", {
    x: -innerH / 2,
    y: -36,
    class: "label",
    "text-anchor": "middle",
    transform: "rotate(-90)",
  });
  yl.textContent = yLabel;
  axes.appendChild(yl);
  plot.appendChild(axes);
}

export interface CurveChartOptions {
  width?: number;
  height?: number;
  series: CurveSeries[];
  target?: number;
  marker?: { x: number; y: number };
  xLabel: string;
  yLabel: string;
  yDomain?: [number, number];
}

export function curveChart(opts: CurveChartOptions): SVGSVGElement {
  const width = opts.width ?? 520;
  const height = opts.height ?? 300;
  const { svg, plot, innerW, innerH } = frame(width, height);
  const xs = opts.series.flatMap((s) => s.xs);
  const ys = opts.series.flatMap((s) => s.ys).concat(opts.target === undefined ? [] : [opts.target]);
  if (xs.length === 0) return svg;
  const sx = scaleLinear(extent(xs), [0, innerW]);
  const sy = scaleLinear(opts.yDomain ?? padDomain(extent(ys)), [innerH, 0]);
  drawAxes(plot, sx, sy, innerH, opts.xLabel, opts.yLabel);
  if (opts.target !== undefined) {
    plot.appendChild(
      el("line", {
        x1: sx(sx.domain[0]),
        x2: sx(sx.domain[1]),
        y1: sy(opts.target),
        y2: sy(opts.target),
        class: "target-line",
      }),
    );
  }
  for (const series of opts.series) {
    const path = el("path", {
      d: linePath(series.xs, series.ys, sx, sy),
      class: "series",
      stroke: series.color,
      fill: "none",
      "stroke-dasharray": series.dashed ? "5 4" : "none",
    });
    path.appendChild(title(series.label));
    plot.appendChild(path);
  }
  if (opts.marker) {
    plot.appendChild(
      el("circle", { cx: sx(opts.marker.x), cy: sy(opts.marker.y), r: 4.5, class: "marker" }),
    );
  }
  svg.appendChild(legend(opts.series, width));
  return svg;
}

export interface DensityPanelOptions {
  width?: number;
  height?: number;
  samples: number[];
  bins?: number;
  color: string;
  xLabel: string;
}

/** Histogram of server draws; a point mass renders as a spike marker. */
export function densityPanel(opts: DensityPanelOptions): SVGSVGElement {
  const width = opts.width ?? 250;
  const height = opts.height ?? 170;
  const { svg, plot, innerW, innerH } = frame(width, height);
  const values = opts.samples;
  if (values.length === 0) return svg;
  const lo = Math.min(...values);
  const hi = Math.max(...values);
  if (lo === hi) {
    const sx = scaleLinear([lo - Math.max(Math.abs(lo) * 0.5, 0.5), hi + Math.max(Math.abs(hi) * 0.5, 0.5)], [0, innerW]);
    const sy = scaleLinear([0, 1], [innerH, 0]);
    drawAxes(plot, sx, sy, innerH, opts.xLabel, "");
    const spike = el("g", { class: "spike" });
    spike.appendChild(el("line", { x1: sx(lo), x2: sx(lo), y1: innerH, y2: 8, stroke: opts.color, "stroke-width": 3 }));
    spike.appendChild(el("circle", { cx: sx(lo), cy: 8, r: 5, fill: opts.color }));
    spike.appendChild(title(`point mass at ${formatTick(lo)}`));
    plot.appendChild(spike);
    svg.classList.add("point-mass");
    return svg;
  }
  const bins = histogram(values, opts.bins ?? 30);
  const maxCount = Math.max(...bins.map((b) => b.count));
  const sx = scaleLinear([lo, hi], [0, innerW]);
  const sy = scaleLinear([0, maxCount], [innerH, 0]);
  drawAxes(plot, sx, sy, innerH, opts.xLabel, "");
  const bars = el("g", { class: "bars", fill: opts.color });
  for (const bin of bins) {
    bars.appendChild(
      el("rect", {
        x: sx(bin.x0),
        y: sy(bin.count),
        width: Math.max(sx(bin.x1) - sx(bin.x0) - 0.5, 0.5),
        height: innerH - sy(bin.count),
        opacity: 0.85,
      }),
    );
  }
  plot.appendChild(bars);
  return svg;
}

export interface ScatterPanelOptions {
  width?: number;
  height?: number;
  xs: number[];
  ys: number[];
  xLabel: string;
  yLabel: string;
  maxPoints?: number;
}

/** Joint draw scatter; thinned evenly when the sample is large. */
export function scatterPanel(opts: ScatterPanelOptions): SVGSVGElement {
  const width = opts.width ?? 250;
  const height = opts.height ?? 170;
  const { svg, plot, innerW, innerH } = frame(width, height);
  if (opts.xs.length === 0) return svg;
  const sx = scaleLinear(extent(opts.xs), [0, innerW]);
  const sy = scaleLinear(extent(opts.ys), [innerH, 0]);
  drawAxes(plot, sx, sy, innerH, opts.xLabel, opts.yLabel);
  const limit = opts.maxPoints ?? 800;
  const stride = Math.max(1, Math.ceil(opts.xs.length / limit));
  const dots = el("g", { class: "dots" });
  for (let i = 0; i < opts.xs.length; i += stride) {
    dots.appendChild(el("circle", { cx: sx(opts.xs[i]!), cy: sy(opts.ys[i]!), r: 1.6, opacity: 0.45 }));
  }
  plot.appendChild(dots);
  return svg;
}

function legend(series: CurveSeries[], width: number): SVGGElement {
  const g = el("g", { class: "legend", transform: `translate(${width - MARGIN.right - 150},${MARGIN.top})` });
  series.forEach((s, i) => {
    const y = i * 16;
    g.appendChild(el("line", {
      x1: 0,
      x2: 18,
      y1: y,
      y2: y,
      stroke: s.color,
      "stroke-width": 2,
      "stroke-dasharray": s.dashed ? "5 4" : "none",
    }));
    const text = el("text", { x: 24, y: y + 4, class: "tick" });
    text.textContent = s.label;
    g.appendChild(text);
  });
  return g;
}

function title(text: string): SVGTitleElement {
  const node = document.createElementNS(SVG_NS, "title");
  node.textContent = text;
  return node;
}

function padDomain([lo, hi]: [number, number]): [number, number] {
  const pad = (hi - lo) * 0.06 || 0.05;
  return [Math.max(0, lo - pad), Math.min(1, hi + pad)];
}
