import { ApiClient } from "../api.js";
import { lineChart } from "../charts.js";
import { bucketSeries, forecastSeries } from "../series.js";
import type { ViewState } from "../state.js";

export async function renderForecast(
  container: HTMLElement,
  api: ApiClient,
  state: ViewState,
  method = "parx",
  horizon = 48,
): Promise<void> {
  if (!state.selectedMeter) {
    container.innerHTML = "<p>Select a meter.</p>";
    return;
  }
  const forecast = await api.forecast(state.selectedMeter, method, horizon);
  const recent = await api.consumption(state.selectedMeter, "hourly");
  const tail = recent.buckets.slice(-72);
  const history = bucketSeries("recent actual", tail);
  // offset the forecast on a shared numeric axis after the history window
  const fc = forecastSeries(forecast);
  const joined = [
    { label: history.label, x: history.x.map((_, i) => i), y: history.y },
    { label: fc.label, x: fc.x.map((v) => (v as number) + tail.length), y: fc.y },
  ];
  const warning = forecast.warnings.length
    ? `<p class="warning">${forecast.warnings.join("; ")}</p>`
    : "";
  container.innerHTML =
    warning + lineChart(joined, `${method} forecast, next ${horizon} hours`);
}
