import { describe, expect, it } from "vitest";

import { formatDate, lineChart, pieChart } from "../src/charts";
import { qa, text } from "./support";

describe("pieChart", () => {
  it("draws one slice per non-zero value with the value attached", () => {
    const chart = pieChart("by label", [
      { label: "A", value: 3, color: "#111" },
      { label: "B", value: 1, color: "#222" },
      { label: "C", value: 0, color: "#333" },
    ]);
    const slices = qa(chart, ".slice");
    expect(slices.map((s) => s.getAttribute("data-label")))
      .toEqual(["A", "B"]);
    expect(slices.map((s) => s.getAttribute("data-value")))
      .toEqual(["3", "1"]);
    // zero-valued slices still get a legend row
    const values = qa(chart, ".legend-value");
    expect(values.map((v) => v.textContent)).toEqual(["3", "1", "0"]);
    expect(values.map((v) => v.getAttribute("data-value")))
      .toEqual(["3", "1", "0"]);
  });

  it("renders a full disc when only one slice is non-zero", () => {
    const chart = pieChart("by label", [
      { label: "A", value: 4, color: "#111" },
      { label: "B", value: 0, color: "#222" },
    ]);
    const slices = qa(chart, ".slice");
    expect(slices).toHaveLength(1);
    expect(slices[0].tagName.toLowerCase()).toBe("circle");
    expect(slices[0].getAttribute("data-value")).toBe("4");
    expect(qa(chart, ".legend-row")).toHaveLength(2);
  });

  it("shows the empty state when everything is zero", () => {
    const chart = pieChart("by label", [
      { label: "A", value: 0, color: "#111" },
    ]);
    expect(chart.querySelector("svg")).toBeNull();
    expect(text(chart, ".empty-state")).toBe("no classified items yet");
    expect(text(chart, ".legend-value")).toBe("0");
  });

  it("uses the display name in the legend when given", () => {
    const chart = pieChart("by label", [
      { label: "CODE_DESIGN_DEBT", value: 2, color: "#111",
        display: "code/design" },
    ]);
    expect(text(chart, ".legend-name")).toBe("code/design");
  });
});

describe("lineChart", () => {
  const series = [
    { name: "alpha", color: "#111", points: [
      { x: 100, y: 2, commit: "c1" },
      { x: 200, y: 5, commit: "c2" },
    ] },
    { name: "beta", color: "#222", points: [
      { x: 100, y: 0, commit: "c1" },
      { x: 200, y: 1, commit: "c2" },
    ] },
  ];

  it("plots one marker per point carrying the payload value", () => {
    const chart = lineChart("over time", series);
    expect(qa(chart, ".series-line")).toHaveLength(2);
    const points = qa(chart, '.series-point[data-series="alpha"]');
    expect(points.map((p) => p.getAttribute("data-value")))
      .toEqual(["2", "5"]);
    expect(points.map((p) => p.getAttribute("data-commit")))
      .toEqual(["c1", "c2"]);
    expect(points.map((p) => p.getAttribute("data-timestamp")))
      .toEqual(["100", "200"]);
  });

  it("handles a single snapshot without drawing a line", () => {
    const chart = lineChart("over time", [
      { name: "alpha", color: "#111",
        points: [{ x: 100, y: 3, commit: "c1" }] },
    ]);
    expect(qa(chart, ".series-line")).toHaveLength(0);
    expect(qa(chart, ".series-point")).toHaveLength(1);
  });

  it("shows the empty state when there are no points", () => {
    const chart = lineChart("over time", []);
    expect(text(chart, ".empty-state")).toBe("no snapshots yet");
  });
});

describe("formatDate", () => {
  it("renders epoch seconds as a calendar date", () => {
    expect(formatDate(1600000000)).toBe("2020-09-13");
  });
});
