import { ApiClient, ApiRequestError } from "../api.js";
import { barChart, lineChart } from "../charts.js";
import {
  dailyProfileSeries,
  disaggregationSeries,
  histogramBars,
  thermalLines,
} from "../series.js";
import type { ViewState } from "../state.js";

export async function renderPatterns(
  container: HTMLElement,
  api: ApiClient,
  state: ViewState,
): Promise<void> {
  if (!state.selectedMeter) {
    container.innerHTML = "<p>Select a meter.</p>";
    return;
  }
  try {
    const profile = await api.profile(state.selectedMeter);
    const three = profile.three_line;
    const summary =
      `<p class="summary">base load ${fmt(three.base_load)} kWh | ` +
      `heating ${fmt(three.heating_gradient)} kWh/&deg;C | ` +
      `cooling ${fmt(three.cooling_gradient)} kWh/&deg;C</p>`;
    container.innerHTML =
      summary +
      barChart(histogramBars(profile), "consumption variability") +
      lineChart(dailyProfileSeries(profile), "daily activity profile (kWh/h)") +
      lineChart(thermalLines(profile), "thermal sensitivity (percentile lines)") +
      lineChart(disaggregationSeries(profile), "recent disaggregation (kWh/h)");
  } catch (err) {
    if (err instanceof ApiRequestError && err.status === 409) {
      container.innerHTML =
        `<p class="prompt">Models are not built for ${state.selectedMeter} yet. ` +
        `Run <code>meterflow fit</code> first.</p>`;
      return;
    }
    throw err;
  }
}

function fmt(v: number | null): string {
  return v === null ? "n/a" : v.toFixed(3);
}
